"""Exception types raised by spatialvs."""


class SpatialVSError(Exception):
    """Base class for all package errors."""


class SingularSubmatrix(SpatialVSError, ValueError):
    """A principal block of the covariance operator is numerically singular.

    ``index`` carries the offending variable (1-based) when the failure comes
    from a leave-one-out evaluation, ``members`` the index set being inverted.
    """

    def __init__(self, message, members=None, index=None):
        super().__init__(message)
        self.members = members
        self.index = index


class DegenerateSample(SpatialVSError, ValueError):
    pass


class GridTooLarge(SpatialVSError, ValueError):
    pass


class FoldTooSmall(SpatialVSError, ValueError):
    pass


class AllFoldsFailed(SpatialVSError, RuntimeError):
    pass


class NotUnivariateResponse(SpatialVSError, ValueError):
    pass


class EmptyCell(SpatialVSError, ValueError):
    pass


class ConfigError(SpatialVSError, ValueError):
    pass
