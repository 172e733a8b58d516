"""Exception hierarchy. Config/parameter problems and numerical-integrity
failures are distinguished so the CLI can map them to exit codes."""


class PlasmodisError(Exception):
    """Base class for all package errors."""


class ParameterError(PlasmodisError):
    """Invalid parameter values (ranges, signs, unit mismatches)."""


class FormatError(PlasmodisError):
    """Malformed input file."""


class CoverageError(PlasmodisError):
    """Tabulated data does not cover the requested grid domain."""


class DataConsistencyError(PlasmodisError):
    """Physically inconsistent input data (e.g. non-positive excitation energy)."""


class PhysicsError(PlasmodisError):
    """Requested quantity does not exist for this system (e.g. no bound state)."""


class ConvergenceError(PlasmodisError):
    """An iterative computation failed to converge."""


class FitQualityError(PlasmodisError):
    """A nonlinear fit did not reach acceptable residuals."""


class StiffnessError(PlasmodisError):
    """The adaptive integrator collapsed its step size."""


class IntegrityError(PlasmodisError):
    """A propagation invariant (trace, positivity) was violated."""
