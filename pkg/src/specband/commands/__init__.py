"""Command implementations behind the `specband` CLI.

Each command reads its inputs, writes its outputs and a run manifest under one
output directory, and raises `SpecbandError` subclasses; exit codes are assigned
by the CLI layer.
"""

from .ablate import run_ablate
from .bands import read_selection, run_analyze, run_select_bands
from .gradcheck import GRADCHECK_TOLERANCE, GradcheckResult, run_gradcheck
from .manifest import RunManifest, write_manifest
from .synth import run_synth
from .train import DataOptions, TrainSummary, run_eval, run_train

__all__ = [
    "DataOptions",
    "GRADCHECK_TOLERANCE",
    "GradcheckResult",
    "RunManifest",
    "TrainSummary",
    "read_selection",
    "run_ablate",
    "run_analyze",
    "run_eval",
    "run_gradcheck",
    "run_select_bands",
    "run_synth",
    "run_train",
    "write_manifest",
]
