"""Utility helpers: logging setup, validation, content digests."""

from .digest import digest_files, sha256_file
from .log_setup import configure_logging
from .validation import (
    cube_stem,
    parse_index_list,
    stem_file,
    validate_band_ratio,
    validate_input_path,
    validate_patch_size,
    validate_positive,
)

__all__ = [
    "configure_logging",
    "cube_stem",
    "digest_files",
    "parse_index_list",
    "sha256_file",
    "stem_file",
    "validate_band_ratio",
    "validate_input_path",
    "validate_patch_size",
    "validate_positive",
]
