"""Exception hierarchy shared by every module of the toolkit."""


class OrbitObsError(Exception):
    """Base class. The CLI maps subclasses onto exit codes."""

    exit_code = 1


class InvalidInput(OrbitObsError, ValueError):
    exit_code = 1


class ZeroInput(InvalidInput):
    pass


class BadReductionPrime(InvalidInput):
    pass


class RootOfUnityInput(InvalidInput):
    pass


class PreperiodicPoint(InvalidInput):
    pass


class TorsionPoint(InvalidInput):
    pass


class UnsupportedCase(InvalidInput):
    pass


class SingularReduction(InvalidInput):
    pass


class BudgetExhausted(OrbitObsError):
    """A search or factorization ran out of its configured budget."""

    exit_code = 2


class FactorizationTimeout(BudgetExhausted):
    pass


class InsufficientWitnesses(BudgetExhausted):
    pass


class CoordinateOverflow(BudgetExhausted):
    pass


class InvariantViolation(OrbitObsError):
    """An internal cross-check failed; always a bug."""

    exit_code = 3
