"""
Central configuration for the radiofox pipeline.

All environment-driven constants live here so they can be imported by any
package or the orchestrator without re-reading the environment in multiple
places.  ``load_dotenv()`` is called by the entry point before this module is
imported, so values from a local ``.env`` file are honoured.
"""
import os
import socket

import logfire

# ---------------------------------------------------------------------------
# Directory defaults
# ---------------------------------------------------------------------------
DEFAULT_OUTPUT_DIR = os.getenv('RADIOFOX_OUTPUT_DIR', './radiofox-output')

# ---------------------------------------------------------------------------
# Reproducibility / parallelism
# ---------------------------------------------------------------------------
DEFAULT_SEED = int(os.getenv('RADIOFOX_SEED', '42'))
# Thread count for per-tree fitting, CV folds and objective evaluation.
# Never written to a config or manifest: results do not depend on it.
DEFAULT_N_JOBS = int(os.getenv('RADIOFOX_N_JOBS', '1'))

# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------
LOG_LEVEL = os.getenv('RADIOFOX_LOG_LEVEL', 'INFO').upper()

# ---------------------------------------------------------------------------
# Test gating
# ---------------------------------------------------------------------------
SLOW_TESTS = os.getenv('RADIOFOX_SLOW_TESTS', '').lower() in ('1', 'true', 'yes')


def resolve_n_jobs(n_jobs: int | None = None) -> int:
    """Return an explicit thread count, falling back to RADIOFOX_N_JOBS."""
    if n_jobs is None:
        n_jobs = DEFAULT_N_JOBS
    return max(1, int(n_jobs))


# ---------------------------------------------------------------------------
# Telemetry
# ---------------------------------------------------------------------------

_telemetry_configured = False


def enable_telemetry(host: str = "localhost", port: int = 4318) -> bool:
    """Return True if an OpenTelemetry collector is reachable at host:port."""
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as s:
        s.settimeout(0.5)
        return s.connect_ex((host, port)) == 0


def configure_telemetry() -> None:
    """Configure Logfire telemetry; silent when no collector is available."""
    global _telemetry_configured
    if _telemetry_configured:
        return
    if enable_telemetry():
        logfire.configure(send_to_logfire=False, service_name="radiofox")
    else:
        logfire.configure(send_to_logfire=False, console=False, service_name="radiofox")
    _telemetry_configured = True
