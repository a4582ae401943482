"""Exception types raised across the package."""


class PAdicError(ArithmeticError):
    pass


class NonUnitDenominator(PAdicError, ValueError):
    """A rational with p in its denominator cannot be an element of Z_(p)."""


class PAdicDivisionByZero(PAdicError, ZeroDivisionError):
    pass


class PrecisionUnderflow(PAdicError):
    """The divisor is indistinguishable from zero at its precision."""


class AmbiguousPivot(PAdicError):
    pass


class AmbiguousRank(PAdicError):
    pass


class SingularPrincipalMinor(PAdicError):
    pass


class NotFullRank(PAdicError, ValueError):
    pass


class NotSurjective(NotFullRank):
    pass


class NotSublattice(PAdicError, ValueError):
    pass


class RankTooLow(PAdicError, ValueError):
    pass


class MissingPlateau(ValueError):
    pass


class Unbounded(ArithmeticError):
    """An infimum or bound diverges to -infinity."""


class NotInTangentSpace(PAdicError, ValueError):
    pass


class StratumViolated(PAdicError, ValueError):
    pass


class PrecisionExhausted(PAdicError):
    """The working precision was too small to certify a result."""


class InvariantViolation(PAdicError):
    """A property that must hold on every trial failed."""
