"""Exception and warning types shared across the package."""


class FloquetTopoError(Exception):
    """Base class for all package errors."""


class DomainError(FloquetTopoError, ValueError):
    pass


class ContractError(FloquetTopoError, ValueError):
    """An input violates an operation's precondition (e.g. non-Hermitian matrix)."""


class BracketError(FloquetTopoError, ValueError):
    pass


class DegeneracyError(FloquetTopoError, ArithmeticError):
    """Band degeneracy where a gapped spectrum is required."""


class ResolutionError(FloquetTopoError, ArithmeticError):
    """Neighbouring states on a k-grid are (nearly) orthogonal; refine the grid."""


class NonConvergenceError(FloquetTopoError, ArithmeticError):
    pass


class GaplessError(FloquetTopoError, ArithmeticError):
    """Invariant undefined because the relevant gap closes."""


class ConfigError(FloquetTopoError, ValueError):
    pass


class RegimeWarning(UserWarning):
    """Parameters lie outside the regime where an approximation is trusted."""
