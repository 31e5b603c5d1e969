"""Exception hierarchy for the Steklov window engine.

Code map:
    SteklovError            Base class, never raised directly
        GeometryError       Polyline or mesh construction failed
        ConfigError         Invalid configuration value (carries the key)
        MapError            Perturbation map is not a diffeomorphism / inverse failed
        ShapeError          Nodal vector does not match the mesh
        MeasureError        Invalid or mismatched boundary measure
        InfeasibleError     Window leaves no free boundary
        SolverError         Eigensolver did not converge
        InsufficientData    Not enough rows to fit a rate
        WitnessError        Subcritical test function is not admissible
"""


class SteklovError(RuntimeError):
    """Base class for every error raised by the engine."""


class GeometryError(SteklovError):
    """Raised when a boundary polyline or a triangulation is invalid."""


class ConfigError(SteklovError, ValueError):
    """Raised for an invalid configuration entry.

    Attributes:
        key: Name of the offending configuration key.
    """

    def __init__(self, key: str, message: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if message else key)


class MapError(SteklovError):
    """Raised when the perturbation map cannot be evaluated or inverted."""


class ShapeError(SteklovError, ValueError):
    """Raised when an array does not match the mesh it is paired with."""


class MeasureError(SteklovError, ValueError):
    """Raised for negative weights or mismatched boundary discretizations."""


class InfeasibleError(SteklovError):
    """Raised when the window pins the whole boundary."""


class SolverError(SteklovError):
    """Raised when an iterative solver exhausts its iteration budget.

    Attributes:
        iterations: Number of iterations performed before giving up.
    """

    def __init__(self, message: str, iterations: int = 0):
        self.iterations = iterations
        super().__init__(message)


class InsufficientData(SteklovError):
    """Raised when a fit is requested with too few successful rows."""


class WitnessError(SteklovError):
    """Raised when the subcritical witness violates its measure constraint."""
