"""Exception hierarchy shared across the package.

Data problems (bad inputs, malformed files, mismatched shapes) and numerical
failures (leaving a manifold, hitting a cut locus) are kept distinct so the
CLI can map them to different exit codes.
"""


class MMError(Exception):
    """Base class for all package errors."""


class InvalidInputError(MMError):
    """Input violates a documented precondition (data error)."""


class UnsupportedError(MMError):
    """Operation not defined for this kind of input (data error)."""


class NumericalError(MMError):
    """Base class for numerical failures."""


class NotPositiveDefiniteError(NumericalError):
    """A matrix required to be SPD has a non-positive pivot/eigenvalue."""


class SingularityError(NumericalError):
    """A matrix function (log, inv_sqrt) hit a near-zero eigenvalue."""


class CutLocusError(NumericalError):
    """Logarithm map requested at or too close to the cut locus."""


class NumericalDomainError(NumericalError):
    """An inverse trigonometric/hyperbolic argument left its domain."""


class DegenerateConfigurationError(NumericalError):
    """Sampling could not produce enough valid configurations."""
