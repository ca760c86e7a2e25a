"""Exception types. All derive from :class:`PreclusionError` (a ``ValueError``)."""


class PreclusionError(ValueError):
    """Base class for validation and computation errors in this package."""

    #: CLI exit code; validation problems are 2, computation-level outcomes 3.
    exit_code = 2


class DimensionMismatch(PreclusionError):
    pass


class InvalidState(PreclusionError):
    pass


class NotAProjector(PreclusionError):
    pass


class NotUnitary(PreclusionError):
    pass


class NonRealWeight(PreclusionError):
    pass


class WeightOutOfRange(PreclusionError):
    pass


class LogWeightPositive(PreclusionError):
    pass


class InvalidEps(PreclusionError):
    pass


class KOutOfRange(PreclusionError):
    pass


class NTooLargeForOracle(PreclusionError):
    pass


class InvalidTolerance(PreclusionError):
    pass


class AllPrecluded(PreclusionError):
    """No Everett copy survives; there is nothing to report a device for."""

    exit_code = 3


class AllPrecludedPersistent(PreclusionError):
    """Even the Born-closest bin is precluded at every scanned ``n``."""

    exit_code = 3
