"""
Small file helpers shared by the CLI and the pipeline runner.

JSON is the canonical config format; ``.yaml``/``.yml`` files are parsed with
PyYAML.  Writers always use a trailing newline and sorted keys so that
re-running a command produces byte-identical files.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import yaml

from core.errors import RadiofoxError


def load_config_file(path: str | Path) -> Any:
    """Load a JSON or YAML config file into plain Python objects."""
    path = Path(path)
    if not path.is_file():
        raise RadiofoxError(f"Config file does not exist: '{path}'")
    text = path.read_text(encoding='utf-8')
    try:
        if path.suffix.lower() in ('.yaml', '.yml'):
            return yaml.safe_load(text)
        return json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise RadiofoxError(f"Invalid config file '{path}': {e}")


def dumps_json(data: Any) -> str:
    """Serialise *data* the way every radiofox artifact is written."""
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_text(path: str | Path, text: str) -> Path:
    """Write *text* to *path*, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
    return path


def write_json(path: str | Path, data: Any) -> Path:
    """Write *data* as sorted, indented JSON."""
    return write_text(path, dumps_json(data))
