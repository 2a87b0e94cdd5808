"""Exception hierarchy shared across the package."""


class HalfsumError(Exception):
    """Base class for all errors raised by halfsum."""


class InvalidKernel(HalfsumError):
    """Kernel parameters are malformed (NaN/inf, empty grid, ...)."""


class DegenerateKernel(HalfsumError):
    """Kernel mass is too close to zero to normalize."""


class FlavorMismatch(HalfsumError):
    """Binary kernel operation applied to kernels of different group flavors."""


class InvalidArgument(HalfsumError):
    """Argument outside the operation's domain (k = 0, r <= 0, empty sequence)."""


class TransformFailed(HalfsumError):
    """Transform quadrature did not converge within the refinement budget."""


class QuadratureFailed(HalfsumError):
    """Adaptive quadrature exhausted its budget.

    Carries the offending subinterval when known.
    """

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class ConfigError(HalfsumError):
    """Bad configuration: unknown labels, malformed spec strings or files."""
