"""Exception hierarchy shared by every module of the package."""


class NepError(Exception):
    """Base class for all errors raised by nepcorr."""


class SingularMatrix(NepError):
    """A linear solve met a pivot below the singularity threshold."""


class NoConvergence(NepError):
    """An iterative procedure hit its iteration cap."""


class DimensionMismatch(NepError, ValueError):
    pass


class OutOfRegion(NepError, ValueError):
    """The spectral parameter lies outside the family's analyticity region."""


class QuadratureBreakdown(NepError):
    """A Cauchy quadrature circle leaves the analyticity region."""


class NodeOnPole(NepError):
    """A contour quadrature node sits on (or numerically at) a pole."""


class RankOverflow(NepError):
    """The moment rank saturated the probe capacity; more probes are needed."""


class SingularJacobian(NepError):
    pass


class OutsideBasin(NepError, ValueError):
    """Initial guess for Newton refinement is too far from an eigenpair."""


class DefectiveCluster(NepError):
    """The eigenvalue group carries Jordan structure (left/right Gram singular)."""


class MultiplicityMismatch(NepError):
    pass


class DenominatorNearSingular(NepError):
    """The first-order correction denominator vanishes numerically."""


class ZeroEigenvalue(NepError, ValueError):
    pass


class NotLinearFamily(NepError, TypeError):
    pass


class MatrixFormatError(NepError, ValueError):
    pass


class ConfigError(NepError, ValueError):
    pass
