"""Exception types shared across the toolkit."""


class TdoaError(Exception):
    """Base class for domain errors raised by this package."""


class SingularSystemError(TdoaError):
    """A linear system is rank deficient (or nearly so) and cannot be solved.

    Carries the offending minimum singular value for diagnostics.
    """

    def __init__(self, message: str, sigma_min: float = 0.0):
        super().__init__(message)
        self.sigma_min = sigma_min


class DegenerateGeometryError(TdoaError):
    """The measurement Jacobian is rank deficient at the current point.

    Typical cause: all anchors seen from the evaluation point along
    (anti)parallel directions, e.g. collinear anchors with the point on
    the line.
    """

    def __init__(self, message: str, sigma_min: float = 0.0):
        super().__init__(message)
        self.sigma_min = sigma_min


class NearAnchorError(TdoaError):
    """An evaluation point fell within the guard radius of an anchor."""
