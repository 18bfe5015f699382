"""Semantic exception hierarchy.

Every error raised by this package derives from :class:`UnionBoundsError`,
so callers can catch the whole family with one clause.  The distinction that
matters operationally is between *user errors* (bad arguments, malformed
inputs) and *mathematical infeasibility* (inputs that no probability space
can realize); the CLI maps the former to exit code 2 and the latter to 3.
"""


class UnionBoundsError(Exception):
    """Base class for all errors raised by unionbounds."""


class ArgumentError(UnionBoundsError, ValueError):
    """An argument is out of its documented range or malformed."""


class DimensionMismatch(UnionBoundsError):
    """Vector/matrix dimensions are inconsistent."""


class InvalidWeights(UnionBoundsError):
    """The weight vector violates a precondition (zero subset sum, or a
    positivity requirement of the operation)."""


class DegenerateWeights(UnionBoundsError):
    """A bound formula divides by a nonpositive quadratic form or weight
    aggregate and has no finite value."""


class NoFeasibleSubset(UnionBoundsError):
    """A constrained subset-selection problem has an empty feasible family."""


class ResolutionTooCoarse(UnionBoundsError):
    """Quantizing weights changed the feasibility of a threshold comparison;
    rerun with a finer resolution."""


class InconsistentInfo(UnionBoundsError):
    """The partial information (event probabilities plus weighted pairwise
    sums) cannot come from any probability space."""


class InfeasibleX(UnionBoundsError):
    """The shared-overlap parameter x lies outside its feasibility window."""
