"""Exception types shared across the package."""


class SimulationError(Exception):
    """Base class for all rismimo errors."""


class ConfigError(SimulationError):
    """Bad scenario configuration: unknown key, out-of-range value, syntax."""


class InvalidDimensionError(SimulationError):
    """Array dimensions that cannot form a panel (zero rows/cols, bad spacing)."""


class DegenerateGeometryError(SimulationError):
    """Geometry with a zero propagation distance; the 1/(4*pi*d) amplitude diverges."""


class InvalidInputError(SimulationError):
    """Numerical input violating a precondition (empty gains, non-Hermitian covariance)."""


class NumericalFailureError(SimulationError):
    """A linear-algebra routine failed to converge."""
