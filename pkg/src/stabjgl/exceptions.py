class StabJGLError(Exception):
    """Base class for errors raised by this package."""


class ZeroVarianceError(StabJGLError, ValueError):
    def __init__(self, group, column):
        self.group = group
        self.column = column
        super().__init__(f"column {column!r} in group {group!r} has zero variance")


class SolverError(StabJGLError):
    """The ADMM iteration could not proceed (e.g. eigendecomposition failure)."""


class SubsampleFailureError(StabJGLError):
    """Too many subsample fits failed at one lambda1 value."""


class SelectionError(StabJGLError):
    """No candidate fit in a selection grid succeeded."""


class StageError(StabJGLError):
    """Wraps an error raised inside one stage of the selection pipeline."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")
