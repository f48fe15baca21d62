"""Exception hierarchy shared by every module in the package."""


class RotopulsatorError(Exception):
    """Base class for all errors raised by this package."""


class BadParameter(RotopulsatorError, ValueError):
    pass


class ZeroVector(RotopulsatorError, ValueError):
    pass


class Unsupported(RotopulsatorError, NotImplementedError):
    pass


class SingularConfiguration(RotopulsatorError):
    """Two bodies collide or sit at antipodal points, so the force law is undefined."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class SingularDenominator(SingularConfiguration):
    """A criterion denominator ``1 - (q_i . q_j)^2`` vanishes for the pair ``(i, j)``."""


class CoincidentBodies(SingularConfiguration):
    pass


class StepUnderflow(RotopulsatorError):
    pass


class FiberSingular(RotopulsatorError):
    pass


class CriterionViolated(RotopulsatorError):
    pass


class AmbiguousClustering(RotopulsatorError):
    pass


class InsufficientSamples(RotopulsatorError, ValueError):
    pass


class DegenerateTriangle(RotopulsatorError, ValueError):
    pass


class ZeroDenominator(RotopulsatorError, ZeroDivisionError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair
