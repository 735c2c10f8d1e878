"""Tests for settings, command-line validation helpers and digests."""

from pathlib import Path

import pytest

from specband.config import load_settings
from specband.dataio import HyperCube, read_cube, write_cube
from specband.errors import ConfigurationError, CubeFormatError
from specband.utils import (
    cube_stem,
    digest_files,
    parse_index_list,
    sha256_file,
    stem_file,
    validate_band_ratio,
    validate_input_path,
    validate_patch_size,
    validate_positive,
)


def test_settings_from_environment(monkeypatch):
    """Test SPECBAND_* variables and the explicit thread override."""
    monkeypatch.setenv("SPECBAND_THREADS", "3")
    monkeypatch.setenv("SPECBAND_LOG_LEVEL", "debug")
    monkeypatch.setenv("SPECBAND_LOG_JSON", "yes")
    settings = load_settings()
    assert settings.threads == 3
    assert settings.log_level == "DEBUG"
    assert settings.log_json
    assert load_settings(threads=5).threads == 5


def test_settings_defaults(monkeypatch):
    """Test defaults and an unparseable thread count."""
    monkeypatch.setenv("SPECBAND_THREADS", "many")
    monkeypatch.delenv("SPECBAND_LOG_LEVEL", raising=False)
    monkeypatch.delenv("SPECBAND_LOG_JSON", raising=False)
    settings = load_settings()
    assert settings.threads == 1
    assert settings.log_level == "INFO"
    assert not settings.log_json


def test_parse_index_list():
    """Test comma-separated indices with spaces and rejected inputs."""
    assert parse_index_list("2,7,19") == [2, 7, 19]
    assert parse_index_list(" 3 , 4 ") == [3, 4]
    for bad in ("", "1,,2", "a,b", "-1"):
        with pytest.raises(ConfigurationError):
            parse_index_list(bad)


def test_value_validators():
    """Test band ratio, patch size and positivity checks."""
    assert validate_band_ratio(1.0) == 1.0
    with pytest.raises(ConfigurationError, match="--band-ratio"):
        validate_band_ratio(1.5)
    with pytest.raises(ConfigurationError):
        validate_band_ratio(0.0)
    assert validate_patch_size(11) == 11
    with pytest.raises(ConfigurationError):
        validate_patch_size(10)
    assert validate_positive("--per-class-train", 0, strict=False) == 0
    with pytest.raises(ConfigurationError, match="--lr"):
        validate_positive("--lr", 0.0)


def test_input_path_resolution(temp_dir):
    """Test stems, either file name, and a missing payload."""
    Path(temp_dir, "cube.json").write_text("{}")
    Path(temp_dir, "cube.raw").write_bytes(b"")
    stem = Path(temp_dir, "cube")
    assert validate_input_path(stem) == stem
    assert validate_input_path(f"{temp_dir}/cube.raw") == stem
    Path(temp_dir, "half.json").write_text("{}")
    with pytest.raises(CubeFormatError):
        validate_input_path(f"{temp_dir}/half")


def test_dotted_stems_keep_their_name(rng, temp_dir):
    """Test that `scene.v2` resolves to `scene.v2.json`/`.raw` everywhere."""
    stem = Path(temp_dir, "scene.v2")
    assert cube_stem(f"{stem}.json") == stem
    assert cube_stem(stem) == stem
    assert stem_file(stem, ".raw") == Path(temp_dir, "scene.v2.raw")

    write_cube(HyperCube(values=rng.standard_normal((2, 3, 3))), stem)
    assert sorted(p.name for p in Path(temp_dir).iterdir()) == ["scene.v2.json", "scene.v2.raw"]
    assert validate_input_path(f"{stem}.raw") == stem
    assert read_cube(stem).values.shape == (2, 3, 3)
    assert sorted(Path(p).name for p in digest_files([stem])) == ["scene.v2.json", "scene.v2.raw"]


def test_digests(temp_dir):
    """Test sha256 of a known payload and stem expansion."""
    Path(temp_dir, "a.json").write_text("{}")
    Path(temp_dir, "a.raw").write_bytes(b"abc")
    assert sha256_file(Path(temp_dir, "a.raw")) == (
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    )
    digests = digest_files([f"{temp_dir}/a", f"{temp_dir}/missing"])
    assert sorted(Path(p).name for p in digests) == ["a.json", "a.raw"]
