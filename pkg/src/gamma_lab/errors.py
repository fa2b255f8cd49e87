"""Exception hierarchy shared by all gamma_lab modules."""


class GammaLabError(Exception):
    """Base class for every error raised by gamma_lab."""


class ShapeMismatch(GammaLabError, ValueError):
    pass


class NotHermitian(GammaLabError, ValueError):
    pass


class NotPSD(GammaLabError, ValueError):
    pass


class NotContraction(GammaLabError, ValueError):
    pass


class NotContractions(NotContraction):
    """Raised when a pair of operators to be symmetrized are not both contractions."""


class NotCommuting(GammaLabError, ValueError):
    pass


class NotUnitary(GammaLabError, ValueError):
    pass


class NotIsometry(GammaLabError, ValueError):
    pass


class TriangularizationFailed(GammaLabError, ArithmeticError):
    """No common Schur basis was found after the allowed number of retries."""


class SqrtFailed(GammaLabError, ArithmeticError):
    """The principal square root does not exist or could not be verified."""


class NumericalRadiusExceeded(GammaLabError, ValueError):
    pass


class FactorizationResidualExceeded(GammaLabError, ArithmeticError):
    """X is not supported on the defect ranges of the completion problem."""


class LayoutMismatch(GammaLabError, ValueError):
    pass
