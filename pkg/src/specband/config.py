"""Environment-driven runtime settings."""

import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Load environment variables from .env file
load_dotenv()


class Settings(BaseModel):
    """Process-wide settings read from the environment."""

    threads: int = Field(1, ge=1, description="Worker cap for batch inference")
    log_level: str = "INFO"
    log_json: bool = False


def _env_flag(name: str, default: str = "false") -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


def load_settings(threads: Optional[int] = None) -> Settings:
    """Build settings from SPECBAND_* environment variables.

    Args:
        threads: Explicit worker count; overrides SPECBAND_THREADS when given

    Returns:
        Validated settings
    """
    env_threads = os.getenv("SPECBAND_THREADS", "1")
    try:
        resolved = int(env_threads)
    except ValueError:
        resolved = 1
    if threads is not None:
        resolved = threads

    return Settings(
        threads=max(1, resolved),
        log_level=os.getenv("SPECBAND_LOG_LEVEL", "INFO").upper(),
        log_json=_env_flag("SPECBAND_LOG_JSON"),
    )
