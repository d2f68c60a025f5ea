"""Exception types shared across the package."""


class ReconError(Exception):
    """Base class for all library errors."""


class InvalidInput(ReconError):
    pass


class DegenerateSimplex(ReconError):
    pass


class NotInAffineHull(ReconError):
    pass


class InsufficientNeighbors(ReconError):
    pass


class NotFound(ReconError):
    pass


class MissingWeight(ReconError):
    pass


class GenericityViolation(ReconError):
    """A probe point landed on (or numerically too close to) a projected face."""


class DegenerateNormalization(ReconError):
    """No usable load constraint could be built after the retry budget."""


class NumericalFailure(ReconError):
    pass


class InfeasibleSpec(ReconError):
    pass


class OrientationUndefined(ReconError):
    pass


class UnsupportedFormat(ReconError):
    pass


class NoCandidates(ReconError):
    pass


class DegenerateSpectrumWarning(UserWarning):
    """PCA eigengap below tolerance; the returned subspace is not well determined."""
