"""Content digests for run manifests."""

import hashlib
from pathlib import Path
from typing import Dict, Iterable, Union

from .validation import CUBE_SUFFIXES, stem_file

PathLike = Union[str, Path]

_CHUNK = 1 << 20


def sha256_file(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(_CHUNK), b""):
            digest.update(block)
    return digest.hexdigest()


def digest_files(paths: Iterable[PathLike]) -> Dict[str, str]:
    """sha256 per existing file, keyed by path string; stems expand to their .json/.raw pair."""
    out: Dict[str, str] = {}
    for path in paths:
        path = Path(path)
        if path.is_file():
            out[str(path)] = sha256_file(path)
            continue
        for suffix in CUBE_SUFFIXES:
            candidate = stem_file(path, suffix)
            if candidate.is_file():
                out[str(candidate)] = sha256_file(candidate)
    return out
