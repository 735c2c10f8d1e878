"""Error hierarchy.

Every error carries the process exit code the command line reports for it:
2 usage/configuration, 3 I/O and file format, 4 numerical failure. The command line
reports anything outside the hierarchy as 1.
"""

from typing import Any, Dict, Optional


EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


class SpecbandError(Exception):
    """Base class for all specband errors."""

    exit_code: int = EXIT_USAGE


# Usage and configuration

class ConfigurationError(SpecbandError):
    """A configuration value is outside its documented range."""


class InvalidSpec(ConfigurationError):
    """A synthetic scene specification is inconsistent."""


class EvenPatchSize(ConfigurationError):
    """Patch size must be odd."""


class InsufficientSamples(ConfigurationError):
    """A class has fewer samples than requested for training."""


class ShapeMismatch(SpecbandError, ValueError):
    """Operand shapes are incompatible."""


class IndexOutOfRange(SpecbandError, IndexError):
    """A band index lies outside the valid range."""


class EmptyCube(SpecbandError):
    """A cube has no spatial extent."""


class EmptyTestSet(SpecbandError):
    """Evaluation was requested on an empty set."""


# I/O

class CubeFormatError(SpecbandError):
    """Cube header or payload is malformed."""

    exit_code = EXIT_IO


class HeaderMismatch(CubeFormatError):
    """Header fields are missing or disagree with each other."""


class TruncatedPayload(CubeFormatError):
    """Payload holds fewer bytes than the header declares."""


class UnsupportedDtype(CubeFormatError):
    """Header names a dtype this reader does not handle."""


class RegistrationMismatch(SpecbandError):
    """Co-registered rasters disagree on height or width."""

    exit_code = EXIT_IO


class CheckpointError(SpecbandError):
    """A checkpoint is missing, incomplete or inconsistent with the model."""

    exit_code = EXIT_IO


# Numerical failures

class NumericalError(SpecbandError):
    """Base class for numerical failures."""

    exit_code = EXIT_NUMERICAL


class NonFiniteError(NumericalError):
    """A tensor holds NaN or Inf."""


class NonFiniteGradient(NumericalError):
    """An analytic or numerical gradient is not finite."""


class RankDeficient(NumericalError):
    """An eigen-decomposition failed to converge."""


class DegenerateInput(NumericalError):
    """Input has too little variation for the requested statistic."""


class DivergedLoss(NumericalError):
    """Training loss became non-finite.

    The exception keeps a snapshot of the training state so the caller can dump it.
    """

    def __init__(
        self,
        message: str,
        epoch: int,
        step: int,
        state: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.epoch = epoch
        self.step = step
        self.state = state or {}
