"""Validation utilities for command-line values."""

import re
from pathlib import Path
from typing import List, Optional, Union

import structlog

from ..errors import ConfigurationError, CubeFormatError

logger = structlog.get_logger(__name__)


CUBE_SUFFIXES = (".json", ".raw")


def cube_stem(path: Union[str, Path]) -> Path:
    """Drop a trailing .json/.raw; dots elsewhere in the name belong to the stem."""
    path = Path(path)
    if path.suffix in CUBE_SUFFIXES:
        return path.with_name(path.name[: -len(path.suffix)])
    return path


def stem_file(stem: Union[str, Path], suffix: str) -> Path:
    """Append `suffix` to a cube stem (`scene.v2` -> `scene.v2.json`)."""
    stem = Path(stem)
    return stem.with_name(stem.name + suffix)


def parse_index_list(text: str) -> List[int]:
    """Parse a comma-separated band list such as "2,7,19".

    Args:
        text: Comma-separated non-negative integers

    Returns:
        The indices in the given order
    """
    if text is None or not text.strip():
        raise ConfigurationError("band list is empty")
    if not re.match(r"^\s*\d+(\s*,\s*\d+)*\s*$", text):
        raise ConfigurationError(f"band list '{text}' must be comma-separated non-negative integers")
    return [int(part) for part in text.split(",")]


def validate_band_ratio(ratio: float) -> float:
    """Band ratio K must lie in (0, 1]."""
    if not 0.0 < ratio <= 1.0:
        raise ConfigurationError(f"--band-ratio {ratio} outside (0, 1]")
    return ratio


def validate_patch_size(p: int) -> int:
    if p < 1 or p % 2 == 0:
        raise ConfigurationError(f"--patch-size {p} must be odd and >= 1")
    return p


def validate_positive(name: str, value: Union[int, float], strict: bool = True) -> Union[int, float]:
    """Check value > 0 (or >= 0 when strict is False), naming the flag on failure."""
    if strict and not value > 0:
        raise ConfigurationError(f"{name} must be > 0, got {value}")
    if not strict and value < 0:
        raise ConfigurationError(f"{name} must be >= 0, got {value}")
    return value


def validate_input_path(path: Union[str, Path], suffixes: Optional[List[str]] = None) -> Path:
    """Resolve a cube stem (or either of its files) and check that both files exist.

    Args:
        path: Cube stem, `.json` header or `.raw` payload path
        suffixes: Files that must exist next to the stem (default header and payload)

    Returns:
        The stem path without suffix
    """
    path = cube_stem(path)
    for suffix in suffixes or CUBE_SUFFIXES:
        candidate = stem_file(path, suffix)
        if not candidate.is_file():
            logger.error("Input file missing", path=str(candidate))
            raise CubeFormatError(f"{candidate}: file not found")
    return path
