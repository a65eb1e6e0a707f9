"""Exception hierarchy shared by all ndhinf modules."""


class NdHinfError(Exception):
    """Base class for every error raised by ndhinf."""


class DimensionError(NdHinfError, ValueError):
    pass


class NonHermitian(NdHinfError, ValueError):
    pass


class NoConvergence(NdHinfError, RuntimeError):
    pass


class Singular(NdHinfError, ArithmeticError):
    """Raised when a linear system is numerically singular.

    Attributes
    ----------
    cond : float
        Condition-number estimate of the offending matrix (``inf`` when
        an exact zero pivot was met).
    """

    def __init__(self, msg, cond=float("inf")):
        super().__init__(msg)
        self.cond = cond


class SingularPencil(Singular):
    """``I - Z(z) A`` (or its operator-tuple analogue) is not invertible."""


class Infeasible(NdHinfError):
    """An LMI problem has no strictly feasible point.

    ``best`` is the optimal phase-I value reached (the smallest uniform
    shift ``t`` for which every constraint holds up to ``t I``).
    """

    def __init__(self, msg, best=float("nan"), diagnostic=None):
        super().__init__(msg)
        self.best = best
        self.diagnostic = diagnostic


class SizeCap(NdHinfError):
    pass


class D22NotZero(NdHinfError, ValueError):
    pass


class SingularD(Singular):
    pass


class IllPosed(NdHinfError):
    pass


class ConstructionFailed(NdHinfError):
    pass


class ReconstructionFailed(NdHinfError):
    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


class VerificationFailed(NdHinfError):
    def __init__(self, msg, residual=float("nan")):
        super().__init__(msg)
        self.residual = residual


class SchemaError(NdHinfError, ValueError):
    pass
