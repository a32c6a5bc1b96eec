"""Exception hierarchy for rydcav."""


class RydcavError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(RydcavError, ValueError):
    pass


class NonPositiveRate(ParameterError):
    pass


class NegativeDecay(ParameterError):
    pass


class InconsistentVolume(ParameterError):
    pass


class WrongSignC6(ParameterError):
    pass


class ComputeError(RydcavError, ArithmeticError):
    pass


class SingularMatrix(ComputeError):
    pass


class DegeneratePoles(ComputeError):
    pass


class ConvergenceFailure(ComputeError):
    pass


class ZeroBubble(ComputeError):
    pass


class ResonantDenominator(ComputeError):
    pass


class NonPhysicalDensity(ComputeError):
    pass


class SingularFaddeevSystem(ComputeError):
    pass


class ToleranceNotMet(ComputeError):
    pass


class ConfigError(RydcavError):
    pass
