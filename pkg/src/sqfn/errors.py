"""Exception hierarchy shared by all sqfn modules."""


class SqfnError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SqfnError, ValueError):
    """A scalar argument is outside its admissible range."""


class GridMismatchError(SqfnError, ValueError):
    """Two objects that must share a grid do not."""


class NonFiniteError(SqfnError, ValueError):
    """Input samples contain NaN or Inf."""


class CapabilityError(SqfnError):
    """The operator does not support the requested action (e.g. no gradient)."""


class ResolutionError(SqfnError):
    """The grid or time grid cannot resolve the requested computation."""


class SpectralTailError(SqfnError):
    """Input has too much energy outside the resolved spectral range."""


class AccuracyError(SqfnError):
    """A quadrature or series failed its internal accuracy estimate."""


class ConvergenceError(SqfnError):
    """An iterative construction did not converge within its budget."""


class SingularWeightError(SqfnError, ValueError):
    """A weight has zeros where strict positivity is required."""


class ResourceError(SqfnError):
    """A memory or size budget would be exceeded."""


class BandError(SqfnError):
    """A test family is not band-limited to the safe spectral band."""


class DecayClassError(SqfnError):
    """A multiplier profile lacks the decay needed for an integral to converge."""


class UsageError(SqfnError):
    """Malformed configuration or command line."""
