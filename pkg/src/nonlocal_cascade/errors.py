"""Exception hierarchy shared by every module of the package."""


class CascadeError(ValueError):
    """Base class for all validation and numerical errors raised here."""


class NotHermitian(CascadeError):
    pass


class NotPsd(CascadeError):
    pass


class DimensionMismatch(CascadeError):
    pass


class InvalidState(CascadeError):
    pass


class InvalidTheta(CascadeError):
    pass


class InvalidGamma(CascadeError):
    pass


class SearchFailed(CascadeError):
    """No measurement angle on the search grid keeps every sharpness below one."""

    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k
