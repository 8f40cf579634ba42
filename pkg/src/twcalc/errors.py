"""Exception and warning types shared across the package."""


class TwcError(Exception):
    """Base class for twcalc errors."""


class GridMismatchError(TwcError):
    """Two grid functions live on incompatible grids."""


class TruncationError(TwcError):
    """Mass outside the resolved box or index range corrupts the result.

    The offending fraction is carried in ``fraction`` when known.
    """

    def __init__(self, message, fraction=None):
        super().__init__(message)
        self.fraction = fraction


class ResolutionError(TwcError):
    """Sampling too coarse for the requested operation.

    ``required_points`` is the per-axis point count that would suffice.
    """

    def __init__(self, message, required_points=None):
        super().__init__(message)
        self.required_points = required_points


class TruncationWarning(UserWarning):
    """Non-fatal loss of coefficients past the index cutoff."""
