"""Closed-form lower bounds from marginal and pairwise information.

Everything here evaluates in O(n^2) straight from a :class:`PartialInfo`.
The bounds fall into two groups:

* Cauchy-Schwarz family, parameterized by a positive weight vector c:

    per-component   sum_i (c_i a_i)^2 / (c_i g_i(c))
    aggregate       (sum_i c_i a_i)^2 / (c' Sigma c)
    ratio form      (sum_i |c_i| a_i)^2 / (sum_i sum_j c_i^2 Sigma_ij)

  with a_i = P(A_i), Sigma_ij = P(A_i inter A_j), and
  g_i(c) = sum_k c_k Sigma_ik.  They form a decreasing chain in that
  order, and the classical ratio-of-squares bound (dc) is the c = 1
  specialization of the per-component form.

* The optimal quadratic weighting (gk): the aggregate form maximized over
  all real c, attained where Sigma c = a.  It is computed here in its
  Rayleigh form (a.c)^2 / (c' Sigma c), which stays a valid lower bound
  even when the linear solve is rank-deficient or the solved weights carry
  negative entries; at an exact solve it collapses to a.c.

Convenience wrappers kat_bound and yat2_bound expose the unit-weight
members of the selection-based bound classes in :mod:`bounds_new`: the
floor/ceiling closed form, and its shared-overlap refinement.

Events with a_i = 0 contribute nothing and are skipped by every
per-event division (that is the limit of each formula as a_i -> 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DegenerateWeights, InvalidWeights
from .linalg import solve_linear_system
from .space import PartialInfo, WeightVector


@dataclass(frozen=True)
class BoundValue:
    """A named bound value with its direction and diagnostics."""

    name: str
    value: float
    kind: str  # "lower" | "upper"
    weights_used: WeightVector | None = None
    notes: dict[str, Any] = field(default_factory=dict)


def _require_positive(w: WeightVector, who: str) -> np.ndarray:
    if not w.all_positive:
        raise InvalidWeights(f"{who} requires an all-positive weight vector")
    return w.c


def dc_bound(info: PartialInfo) -> BoundValue:
    """Ratio-of-squares bound: sum_i a_i^2 / (row sum of Sigma)."""
    total = 0.0
    for i in range(info.n):
        a = info.alpha[i]
        if a <= 0.0:
            continue
        total += a * a / float(np.sum(info.pairwise[i]))
    return BoundValue(name="dc", value=total, kind="lower")


def ratio_bound(info: PartialInfo, w: WeightVector) -> BoundValue:
    """Squared weighted-mean bound with squared-weight denominator.

    Negative components are replaced by their absolute values in the
    numerator, which can only sharpen the bound; the denominator uses
    c_i^2 and is sign-blind.
    """
    c = w.c
    num = float(np.abs(c) @ info.alpha)
    den = float((c * c) @ info.pairwise.sum(axis=1))
    if den <= 0.0:
        raise DegenerateWeights(f"nonpositive denominator {den} in ratio bound")
    return BoundValue(name="ratio", value=num * num / den, kind="lower",
                      weights_used=w)


def cs_percomponent_bound(info: PartialInfo, w: WeightVector) -> BoundValue:
    """Per-event Cauchy-Schwarz bound: sum_i (c_i a_i)^2 / (c_i g_i(c))."""
    c = _require_positive(w, "per-component bound")
    g = info.gamma_vector(w)
    total = 0.0
    for i in range(info.n):
        a = info.alpha[i]
        if a <= 0.0:
            continue
        den = float(c[i] * g[i])
        if den <= 0.0:
            raise DegenerateWeights(
                f"event {i} has nonpositive weighted pairwise sum {g[i]}"
            )
        total += (c[i] * a) ** 2 / den
    return BoundValue(name="cs_percomponent", value=total, kind="lower",
                      weights_used=w)


def cs_aggregate_bound(info: PartialInfo, w: WeightVector) -> BoundValue:
    """Aggregate Cauchy-Schwarz bound: (c.a)^2 / (c' Sigma c)."""
    c = _require_positive(w, "aggregate bound")
    num = float(c @ info.alpha)
    den = float(c @ info.pairwise @ c)
    if den <= 0.0:
        raise DegenerateWeights(f"nonpositive quadratic form {den}")
    return BoundValue(name="cs_aggregate", value=num * num / den, kind="lower",
                      weights_used=w)


def gk_bound(info: PartialInfo) -> tuple[BoundValue, WeightVector]:
    """Optimal quadratic weighting: solve Sigma c = a, evaluate Rayleigh.

    Identical or nested events make Sigma singular; the solve then falls
    back to least squares and the Rayleigh form keeps the result a valid
    bound.  The returned weight vector is classified so callers can see
    whether it is usable by the positive-only bounds.
    """
    sol = solve_linear_system(np.asarray(info.pairwise), np.asarray(info.alpha))
    ctilde = sol.x
    num = float(ctilde @ info.alpha)
    den = float(ctilde @ info.pairwise @ ctilde)
    if den <= 0.0:
        raise DegenerateWeights(f"nonpositive quadratic form {den} at solved weights")
    wv = WeightVector.from_components(ctilde)
    notes = {
        "residual": sol.residual,
        "negative_weights": bool(np.any(ctilde <= 0)),
        "classification": wv.classification.value,
    }
    return BoundValue(name="gk", value=num * num / den, kind="lower",
                      weights_used=wv, notes=notes), wv


def kat_bound(info: PartialInfo) -> BoundValue:
    """Floor/ceiling interpolation bound (unit-weight selection bound).

    Per event, with b_i = (row sum of Sigma) / a_i in [1, n]:

        a_i * (1/floor(b_i) + 1/ceil(b_i) - b_i / (floor(b_i) ceil(b_i)))

    For unit weights the subset sums are the integers 1..n, so the two
    bracketing selections are just floor and ceiling; this closed form is
    what the general selection bound collapses to at c = 1.
    """
    total = 0.0
    for i in range(info.n):
        a = info.alpha[i]
        if a <= 0.0:
            continue
        b = float(np.sum(info.pairwise[i])) / a
        b = min(max(b, 1.0), float(info.n))
        lo = math.floor(b)
        hi = math.ceil(b)
        total += a * (1.0 / lo + 1.0 / hi - b / (lo * hi))
    return BoundValue(name="kat", value=total, kind="lower")


def yat2_bound(info: PartialInfo) -> BoundValue:
    """Shared-overlap refinement at unit weights."""
    from .bounds_new import lnew4  # deferred: bounds_new depends on this module

    inner = lnew4(info, WeightVector.ones(info.n))
    return BoundValue(name="yat2", value=inner.value, kind="lower",
                      notes=dict(inner.notes))
