"""Exception and warning types shared across the package."""


class ObstowerError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ObstowerError):
    """Malformed input data (tables, specs, cochains, ...)."""


class NotNormal(ObstowerError):
    """A subgroup that must be normal is not."""


class NotAbelian(ObstowerError):
    """A group that must be abelian is not."""


class NotAbelianKernel(ObstowerError):
    """A tower step whose kernel layer fails to be abelian."""


class NotACocycle(ObstowerError):
    """A cochain fails the cocycle identity it is required to satisfy."""


class TargetMismatch(ObstowerError):
    """Two maps or cochains that must share a target do not."""


class MixedTargets(ObstowerError):
    """Local data attached to different global objects was combined."""


class RamificationMismatch(ObstowerError):
    """Inertia data is inconsistent with an unramified-place computation."""


class IncompatibleLocalData(ObstowerError):
    """A local-global system whose places do not fit the global datum."""


class DegreeTooLarge(ObstowerError):
    """Requested cohomological degree exceeds the configured budget."""


class TruncationInsufficient(ObstowerError):
    """A graded computation needs more terms than the given truncation."""


class SearchBudgetExceeded(ObstowerError):
    """An enumeration (hom search, lift search) exceeded its budget."""


class SeriesStabilized(UserWarning):
    """A descending series stopped strictly descending before the request."""
