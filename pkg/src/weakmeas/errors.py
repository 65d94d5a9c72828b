"""Exception hierarchy shared by all modules."""


class WeakMeasError(Exception):
    """Base class for errors raised by weakmeas."""


class ValidationError(WeakMeasError, ValueError):
    """An input violates a documented precondition."""


class OrthogonalSelectionError(WeakMeasError, ValueError):
    """Pre- and post-selected states are orthogonal; the weak value diverges."""


class NullPostSelectionError(WeakMeasError):
    """The post-selection probability is numerically zero."""


class EmptyStateError(WeakMeasError):
    """A wavefunction has (numerically) zero norm."""


class NoPostSelectionsError(WeakMeasError):
    """A Monte Carlo run accepted no trials."""
