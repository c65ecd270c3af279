"""Exception types shared across the package."""


class FirstPhotonError(Exception):
    """Base class for every error this package raises deliberately."""


class IdxFormatError(FirstPhotonError):
    """An IDX file is malformed: wrong magic number, bad header, or truncated payload."""


class DatasetMismatchError(FirstPhotonError):
    """Image and label files disagree on the number of records."""


class DarkImageError(FirstPhotonError):
    """An image has zero total brightness, so no photon can pass it and no
    amplitude vector exists for it."""


class LayoutError(FirstPhotonError):
    """A state, weight matrix, or checkpoint disagrees in dimension with the
    class/style basis layout it is used with."""


class NumericalError(FirstPhotonError):
    """A numerical guarantee was violated (unitarity defect above tolerance,
    non-finite loss during training)."""
