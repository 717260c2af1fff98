"""Exception and warning types raised by the solver stack."""


class CouetteError(Exception):
    """Base class for all package errors."""


class SizingError(CouetteError, ValueError):
    pass


class GridMismatchError(CouetteError, ValueError):
    pass


class EndpointError(CouetteError, ValueError):
    """A potential that must vanish at the walls does not."""


class SingularOperatorError(CouetteError, ArithmeticError):
    """The bordered collocation matrix is numerically singular.

    Carries the reciprocal condition estimate so callers can report how close
    ``s`` sits to an eigenvalue of the discrete operator.
    """

    def __init__(self, message, rcond=None):
        super().__init__(message)
        self.rcond = rcond


class MeshTooCoarseError(CouetteError, ArithmeticError):
    pass


class NonConvergenceError(CouetteError, ArithmeticError):
    def __init__(self, message, last_norms=None):
        super().__init__(message)
        self.last_norms = last_norms


class IndefiniteGramError(CouetteError, ArithmeticError):
    pass


class SweepFailure(CouetteError, RuntimeError):
    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = failures or []


class ConditionWarning(UserWarning):
    pass


class TruncationWarning(UserWarning):
    """The maximizing Fourier mode sits on the edge of the truncated range."""


class UnresolvedSpectrumWarning(UserWarning):
    pass
