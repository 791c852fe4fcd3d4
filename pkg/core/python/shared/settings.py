"""
Runtime settings read from the environment.
A `.env` file at the repo root is loaded first, so local overrides don't need exporting.
"""

import os

from dotenv import load_dotenv

load_dotenv()

_repo_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

DEFAULT_OUTPUT_DIR = os.path.join(_repo_root, "apps", "gonemax-lab", "results")


def get_threads(default: int = 1) -> int:
    """Worker count for replica-parallel campaigns (RCGA_THREADS)."""
    value = os.getenv("RCGA_THREADS")
    if not value:
        return default
    try:
        return max(1, int(value))
    except ValueError:
        return default


def get_output_dir() -> str:
    """Artifact root used when neither the CLI nor the config names one (RCGA_OUTPUT_DIR)."""
    return os.getenv("RCGA_OUTPUT_DIR") or DEFAULT_OUTPUT_DIR


def get_log_level() -> str:
    return os.getenv("RCGA_LOG_LEVEL", "INFO")
