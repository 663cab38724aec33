"""Exception hierarchy shared by every engine in the package."""


class NahmError(Exception):
    """Base class for all errors raised by nahmsums."""


class AsymmetricProduct(NahmError):
    """A*D is not symmetric."""


class NotPositiveDefinite(NahmError):
    pass


class DimensionMismatch(NahmError):
    pass


class SingularMatrix(NahmError):
    pass


class NotCoprime(NahmError):
    pass


class PoleAtOne(NahmError):
    pass


class DomainError(NahmError):
    pass


class Divergent(NahmError):
    pass


class InvalidFactor(NahmError):
    pass


class PrecisionUnreachable(NahmError):
    pass


class NoConvergence(NahmError):
    pass


class InconsistentExponents(NahmError):
    pass
