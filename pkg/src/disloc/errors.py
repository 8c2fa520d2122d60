"""Exception types raised across the package."""


class DislocError(Exception):
    """Base class for all errors raised by disloc."""


class NonConvergence(DislocError):
    pass


class InvalidB(DislocError, ValueError):
    pass


class InvalidPotential(DislocError, ValueError):
    pass


class AtDiscontinuity(DislocError, ValueError):
    pass


class AtOriginAmbiguous(AtDiscontinuity):
    pass


class EmptyWindow(DislocError):
    pass


class RootCountMismatch(DislocError):
    pass


class NonRealResult(DislocError):
    pass


class NotAnEigenvalue(DislocError):
    pass


class DegenerateNullVector(DislocError):
    pass


class IndexBelowLadder(DislocError, ValueError):
    pass


class QuadratureFailure(DislocError):
    pass


class InvalidDeletionSet(DislocError, ValueError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class WronskianZero(DislocError):
    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class ConvergenceFailure(DislocError):
    pass


class StepTooCoarse(UserWarning):
    """Two eigenvalues were found inside a single scan cell."""


class TruncationWarning(UserWarning):
    """The grid box is too small for the requested levels."""
