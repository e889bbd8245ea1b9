"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: validation failures -> 1,
solver failures -> 2, parse/IO problems -> 3.
"""


class DlqgError(Exception):
    pass


class DimensionError(DlqgError):
    """A matrix has an inconsistent shape; names the offending matrix."""


class ParseError(DlqgError):
    """A problem or controller file does not match the documented schema."""


class ValidationFailure(DlqgError):
    """A problem instance violates admissibility invariants."""

    stage = "validate"

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(v.message for v in self.violations)
        super().__init__(f"instance is not admissible: {lines}")


class SolverError(DlqgError):
    pass


class DefinitenessError(SolverError):
    """A matrix required to be positive definite is not."""


class ConvergenceError(SolverError):
    """An iterative solver did not meet its residual contract."""

    def __init__(self, message, residual=None, history=None):
        super().__init__(message)
        self.residual = residual
        self.history = list(history) if history is not None else None


class InstabilityError(SolverError):
    """A spectral radius that must be < 1 is not."""

    def __init__(self, message, radius=None):
        super().__init__(message)
        self.radius = radius


class NoiseModelError(SolverError):
    """The joint noise covariance cannot be factorized even with jitter."""


class PipelineError(SolverError):
    """A multi-stage computation failed; carries the stage label."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
