class GravMeasureError(Exception):
    pass


class ConfigError(GravMeasureError, ValueError):
    """Bad scenario file, unknown key or malformed value."""


class GridMismatch(GravMeasureError, ValueError):
    """A record or packet does not live on the grid the operation expects."""


class NumericalFault(GravMeasureError, ArithmeticError):
    pass


class SingularKernel(NumericalFault):
    """sinh(Omega T) vanishes: the endpoints sit on a caustic."""


class DegenerateDenominator(NumericalFault):
    pass


class BoundaryLeak(NumericalFault):
    def __init__(self, message: str, leak: float):
        super().__init__(message)
        self.leak = leak
