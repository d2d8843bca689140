"""Exception hierarchy for defectwalk."""


class WalkError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(WalkError, ValueError):
    """Invalid model parameters."""


class UnitarityViolation(ParameterError):
    pass


class DegenerateShift(ParameterError):
    pass


class UnnormalizedChi(ParameterError):
    pass


class ConfigError(WalkError, ValueError):
    """Malformed run configuration or command-line input."""


class WindowMismatch(WalkError, ValueError):
    pass


class DimensionError(WalkError, ValueError):
    pass


class UnnormalizedInitial(WalkError, ValueError):
    pass


class ResourceLimit(WalkError):
    """A requested lattice window or dense matrix exceeds the configured budget."""


class NumericalFailure(WalkError):
    """Base class for failures that signal a numerical problem rather than bad input."""


class EigensolverFailure(NumericalFailure):
    pass


class ResidualTooLarge(NumericalFailure):
    pass


class ProbeDomainError(WalkError, ValueError):
    pass


class CaseUnavailable(WalkError):
    """No square-summable birth eigenvector exists for the requested case."""


class ZeroVector(WalkError):
    pass


class AnchorClash(WalkError):
    pass
