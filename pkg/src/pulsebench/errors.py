"""Exception types shared across the toolkit.

Each class corresponds to one failure contract so callers (and the CLI)
can tag errors by pipeline stage instead of parsing messages.
"""


class PulsebenchError(Exception):
    """Base class for all toolkit errors."""


class InvalidSpecError(PulsebenchError):
    """A filter/model/run specification is malformed or out of range."""


class InvalidInputError(PulsebenchError):
    """Input data violates a precondition (NaN samples, bad shapes, ...)."""


class InsufficientBeatsError(PulsebenchError):
    """Too few detected heartbeats to proceed."""


class DegenerateBeatError(PulsebenchError):
    """A single beat window is unusable (too short, no fiducials)."""


class InsufficientDataError(PulsebenchError):
    """A statistic needs more observations than were provided."""


class UndefinedMetricError(PulsebenchError):
    """A metric is undefined for the given inputs (zero baseline MAE,
    single-class AUC, unattainable threshold target, ...)."""


class NumericalFailureError(PulsebenchError):
    """A numerical routine failed beyond recovery (non-PD kernel, ...)."""


class InfeasibleSplitError(PulsebenchError):
    """Requested dataset split cannot be constructed from the cohort."""


class DataFormatError(PulsebenchError):
    """Stored data violates the manifest/store/CSV schema."""


class StageError(PulsebenchError):
    """A benchmark pipeline stage failed; message carries the stage tag."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
