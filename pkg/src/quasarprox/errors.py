"""Exception taxonomy shared across the package."""


class QuasarproxError(Exception):
    """Base class for all package errors."""


class OutOfDomain(QuasarproxError):
    pass


class BadParameter(QuasarproxError):
    pass


class NonFiniteInput(QuasarproxError):
    pass


class NonFiniteObjective(QuasarproxError):
    pass


class MissingSubgradient(QuasarproxError):
    pass


class MissingMinimizer(QuasarproxError):
    pass


class InvalidCertificate(QuasarproxError):
    pass


class GammaZeroForGrowth(QuasarproxError):
    """Growth / PL / error-bound checks need a positive gamma."""


class CenterMismatch(QuasarproxError):
    pass


class RankDeficient(QuasarproxError):
    pass


class RangeViolation(QuasarproxError):
    """The certified center is not reachable through the linear map."""


class EmptyRegion(QuasarproxError):
    pass


class UnsupportedAtom(QuasarproxError):
    pass


class InnerBudgetExhausted(QuasarproxError):
    """Raised only by strict callers; the prox solver itself returns
    converged=False instead of raising."""


class InsufficientTrace(QuasarproxError):
    pass


class RadiusRequired(QuasarproxError):
    """Distance-ratio bounds for orders below two need a localization radius."""


class RankDeficientData(QuasarproxError):
    pass


class UnknownEntry(QuasarproxError):
    pass


class ConfigParseError(QuasarproxError):
    pass
