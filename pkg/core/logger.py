"""
Logging and display utilities for pipeline runs.
"""
from datetime import datetime

from core.config import LOG_LEVEL

_LEVELS = {"DEBUG": 10, "INFO": 20, "WARNING": 30, "ERROR": 40}


class Logger:
    """Logging and display utilities for radiofox commands."""

    def __init__(self, level: str = LOG_LEVEL, quiet: bool = False):
        self.threshold = _LEVELS.get(level.upper(), 20)
        self.quiet = quiet

    def enabled(self, level: str) -> bool:
        """Return True if messages at *level* are printed."""
        return not self.quiet and _LEVELS.get(level.upper(), 20) >= self.threshold

    def print_status(self, message: str, level: str = "INFO"):
        """Print status message with timestamp and level."""
        if not self.enabled(level):
            return
        timestamp = datetime.now().strftime("%H:%M:%S")
        print(f"[{timestamp}] {level}: {message}")

    def print_section(self, title: str):
        """Print a section header."""
        if self.quiet:
            return
        print("\n" + "=" * 60)
        print(f" {title}")
        print("=" * 60)
