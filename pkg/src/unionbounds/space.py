"""Finite probability spaces at atom granularity.

A system of N events A_1..A_N over a finite space is described exactly by
the masses of its 2^N - 1 nonempty-membership atoms: atom B (a bitmask over
event indices) is the set of outcomes lying in A_i exactly for the i in B.
Bit i of the mask means membership of event i (0-based), so popcount gives
the atom's degree.  The mass of the "no event" atom is the remainder
1 - sum(p_B) and is never stored.

From the atom masses everything else follows:

    P(A_i)            = sum of p_B over B containing i
    P(A_i inter A_j)  = sum of p_B over B containing both i and j
    P(union)          = sum of all p_B

This module owns the exact ground truth (:class:`EventSpace`), the partial
information the bounds are allowed to consume (:class:`PartialInfo`), the
weight vectors parameterizing them (:class:`WeightVector`), seeded random
instance generators, and the weighted union identity

    P(union) = sum_i sum_{B : i in B} c_i p_B / (sum_{k in B} c_k),

which holds whenever no nonempty subset of weights sums to zero.  The
identity is implemented literally, term by term, so tests can use it as a
numerical check rather than a tautology.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import ArgumentError, InvalidWeights

# Default cap on atom-level representations: 2^24 atoms is the desk-scale
# memory limit.  UB_MAX_N overrides it (documented as unsafe).
DEFAULT_MAX_ATOM_N = 24

# Absolute tolerance for "a subset sum is zero" in weight classification.
ZERO_SUM_TOL = 1e-12

# Validation slack on stored probabilities (sums may overshoot 1 by
# accumulated rounding from normalized draws).
PROB_SLACK = 1e-9

_INFO_TOL = 1e-12


def max_atom_n() -> int:
    """Current cap on n for atom-level representations."""
    raw = os.environ.get("UB_MAX_N")
    if raw is None:
        return DEFAULT_MAX_ATOM_N
    try:
        return int(raw)
    except ValueError as exc:
        raise ArgumentError(f"UB_MAX_N must be an integer, got {raw!r}") from exc


def bit_indices(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def membership_matrix(n: int, masks: Sequence[int] | np.ndarray) -> np.ndarray:
    """(n, len(masks)) 0/1 float matrix; entry (i, j) says i is in masks[j]."""
    m = np.asarray(masks, dtype=np.int64)
    return ((m[None, :] >> np.arange(n, dtype=np.int64)[:, None]) & 1).astype(float)


def subset_sums(c: Sequence[float] | np.ndarray) -> np.ndarray:
    """Sums of every subset of ``c``, indexed by bitmask (index 0 is empty)."""
    sums = np.zeros(1)
    for ck in np.asarray(c, dtype=float):
        sums = np.concatenate([sums, sums + ck])
    return sums


class Classification(enum.Enum):
    """Validity class of a weight vector.

    ALL_POSITIVE     every component > 0 (subset sums automatically nonzero)
    MIXED_SIGN_VALID not all positive, but no nonempty subset sums to zero
    INVALID          some nonempty subset sums to zero (within ZERO_SUM_TOL)
    """

    ALL_POSITIVE = "all_positive"
    MIXED_SIGN_VALID = "mixed_sign_valid"
    INVALID = "invalid"


@dataclass(frozen=True)
class WeightVector:
    """A weight vector c with its validity classification.

    Build through :meth:`from_components`, which classifies by exhaustive
    subset-sum enumeration (the validity condition is itself exponential;
    there is no cheaper exact test).  Direct construction trusts the caller.
    """

    c: np.ndarray
    classification: Classification

    def __post_init__(self) -> None:
        arr = np.asarray(self.c, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ArgumentError("weight vector must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(arr)):
            raise ArgumentError("weight components must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "c", arr)

    @classmethod
    def from_components(cls, c: Sequence[float] | np.ndarray) -> "WeightVector":
        arr = np.asarray(c, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ArgumentError("weight vector must be a nonempty 1-D sequence")
        n = arr.size
        if np.all(arr > 0):
            return cls(arr, Classification.ALL_POSITIVE)
        if n > max_atom_n():
            raise ArgumentError(
                f"classification of a mixed-sign vector needs subset-sum "
                f"enumeration, capped at n={max_atom_n()} (got n={n})"
            )
        sums = subset_sums(arr)[1:]
        if np.min(np.abs(sums)) <= ZERO_SUM_TOL:
            return cls(arr, Classification.INVALID)
        return cls(arr, Classification.MIXED_SIGN_VALID)

    @classmethod
    def ones(cls, n: int) -> "WeightVector":
        return cls(np.ones(n), Classification.ALL_POSITIVE)

    @property
    def n(self) -> int:
        return int(self.c.size)

    @property
    def is_valid(self) -> bool:
        return self.classification is not Classification.INVALID

    @property
    def all_positive(self) -> bool:
        return self.classification is Classification.ALL_POSITIVE


@dataclass(frozen=True)
class EventSpace:
    """Atom-level description of N events: mask -> probability.

    Invariants enforced at construction: 1 <= n <= the atom cap, every mask
    in [1, 2^n - 1], every mass >= 0, and total mass <= 1 (the complement
    atom carries the remainder, within a small slack for rounding).
    """

    n: int
    atom_probs: Mapping[int, float]

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ArgumentError(f"n must be a positive integer, got {self.n!r}")
        if self.n > max_atom_n():
            raise ArgumentError(
                f"n={self.n} exceeds the atom-level cap {max_atom_n()} "
                f"(set UB_MAX_N to override, at your own risk)"
            )
        full = (1 << self.n) - 1
        total = 0.0
        for mask, p in self.atom_probs.items():
            if not isinstance(mask, int) or not 1 <= mask <= full:
                raise ArgumentError(f"atom mask {mask!r} outside [1, {full}]")
            if not math.isfinite(p) or p < 0:
                raise ArgumentError(f"atom {mask} has invalid probability {p!r}")
            total += p
        if total > 1.0 + PROB_SLACK:
            raise ArgumentError(f"atom probabilities sum to {total} > 1")
        object.__setattr__(self, "atom_probs", dict(self.atom_probs))

    @cached_property
    def _masks(self) -> np.ndarray:
        return np.array(sorted(self.atom_probs), dtype=np.int64)

    @cached_property
    def _probs(self) -> np.ndarray:
        return np.array([self.atom_probs[int(m)] for m in self._masks])


def exact_union(space: EventSpace) -> float:
    """Exact union probability: the sum of all stored atom masses."""
    return math.fsum(space.atom_probs.values())


def derive_partial_info(space: EventSpace) -> "PartialInfo":
    """Reduce a space to the information the bounds consume.

    alpha[i] sums atoms containing i; pairwise[i, j] sums atoms containing
    both i and j (so the diagonal repeats alpha).
    """
    n = space.n
    alpha = np.zeros(n)
    pair = np.zeros((n, n))
    masks, probs = space._masks, space._probs
    for lo in range(0, masks.size, 1 << 16):
        mem = membership_matrix(n, masks[lo : lo + (1 << 16)])
        p = probs[lo : lo + (1 << 16)]
        alpha += mem @ p
        pair += (mem * p) @ mem.T
    pair = (pair + pair.T) / 2.0
    return PartialInfo(n=n, alpha=alpha, pairwise=pair)


def weighted_identity(space: EventSpace, w: WeightVector) -> float:
    """Evaluate the weighted union identity term by term.

    Computes sum_i sum_{B : i in B} c_i p_B / s(B) with s(B) the subset sum
    of weights over B.  For any valid weight vector this equals the exact
    union probability; the per-term evaluation (numerator weights summed
    numerically per atom, then exactly-rounded accumulation) keeps it an
    honest numerical identity rather than an algebraic simplification.
    """
    if not w.is_valid:
        raise InvalidWeights("weight vector has a zero-sum subset")
    if w.n != space.n:
        raise ArgumentError(f"weights have n={w.n}, space has n={space.n}")
    c = w.c
    masks, probs = space._masks, space._probs
    pieces: list[float] = []
    for lo in range(0, masks.size, 1 << 16):
        mem = membership_matrix(space.n, masks[lo : lo + (1 << 16)])
        p = probs[lo : lo + (1 << 16)]
        s = c @ mem
        numer = (mem * c[:, None]).sum(axis=0)
        pieces.extend(numer * (p / s))
    return math.fsum(pieces)


def gamma(info: "PartialInfo", w: WeightVector, i: int) -> float:
    """Weighted pairwise sum for event i: sum_k c_k * P(A_i inter A_k).

    The k = i (diagonal) term is included.
    """
    if w.n != info.n:
        raise ArgumentError(f"weights have n={w.n}, info has n={info.n}")
    if not 0 <= i < info.n:
        raise ArgumentError(f"event index {i} out of range for n={info.n}")
    return float(w.c @ info.pairwise[i])


@dataclass(frozen=True)
class PartialInfo:
    """The bound inputs: alpha (event probabilities) and the symmetric
    matrix of pairwise intersection probabilities.

    Unlike atom-level types, this form is not capped at the atom limit;
    bounds that only read (alpha, pairwise) accept larger n.
    """

    n: int
    alpha: np.ndarray
    pairwise: np.ndarray

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ArgumentError(f"n must be a positive integer, got {self.n!r}")
        alpha = np.asarray(self.alpha, dtype=float)
        pair = np.asarray(self.pairwise, dtype=float)
        if alpha.shape != (self.n,):
            raise ArgumentError(f"alpha must have shape ({self.n},), got {alpha.shape}")
        if pair.shape != (self.n, self.n):
            raise ArgumentError(
                f"pairwise must have shape ({self.n}, {self.n}), got {pair.shape}"
            )
        if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(pair))):
            raise ArgumentError("alpha and pairwise entries must be finite")
        asym = np.abs(pair - pair.T)
        if np.max(asym) > _INFO_TOL:
            i, j = np.unravel_index(np.argmax(asym), asym.shape)
            raise ArgumentError(
                f"pairwise not symmetric: entry ({i},{j})={pair[i, j]!r} vs "
                f"({j},{i})={pair[j, i]!r}"
            )
        diag_gap = np.abs(np.diag(pair) - alpha)
        if np.max(diag_gap) > _INFO_TOL:
            i = int(np.argmax(diag_gap))
            raise ArgumentError(
                f"pairwise({i},{i})={pair[i, i]!r} must equal alpha[{i}]={alpha[i]!r}"
            )
        cap = np.minimum(alpha[:, None], alpha[None, :])
        bad = (pair < -_INFO_TOL) | (pair > cap + _INFO_TOL)
        if np.any(bad):
            i, j = map(int, np.argwhere(bad)[0])
            raise ArgumentError(
                f"pairwise({i},{j})={pair[i, j]!r} outside "
                f"[0, min(alpha[{i}], alpha[{j}])]"
            )
        alpha = alpha.copy()
        pair = pair.copy()
        alpha.setflags(write=False)
        pair.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "pairwise", pair)

    def gamma_vector(self, w: WeightVector) -> np.ndarray:
        """All weighted pairwise sums at once: pairwise @ c."""
        if w.n != self.n:
            raise ArgumentError(f"weights have n={w.n}, info has n={self.n}")
        return self.pairwise @ w.c


def parse_model(model: str) -> tuple[str, int | None]:
    """Parse a generator model spec: "dirichlet" or "sparse:K"."""
    if model == "dirichlet":
        return "dirichlet", None
    if model.startswith("sparse:"):
        try:
            k = int(model.split(":", 1)[1])
        except ValueError as exc:
            raise ArgumentError(f"bad sparse atom count in {model!r}") from exc
        return "sparse", k
    raise ArgumentError(f"unknown model {model!r}; use 'dirichlet' or 'sparse:K'")


def generate_random_space(n: int, seed: int, model: str = "dirichlet") -> EventSpace:
    """Generate a random space, deterministically in (n, seed, model).

    dirichlet draws all 2^n atom masses (the empty atom included) from a
    flat Dirichlet, so the stored nonempty masses sum to less than 1.
    sparse:K puts Dirichlet mass on K uniformly chosen nonempty atoms plus
    the empty atom, leaving every other atom at zero.
    """
    if not isinstance(n, int) or not 1 <= n <= max_atom_n():
        raise ArgumentError(f"n must be in [1, {max_atom_n()}], got {n!r}")
    kind, k = parse_model(model)
    rng = np.random.default_rng(seed)
    if kind == "dirichlet":
        masses = rng.dirichlet(np.ones(1 << n))
        atoms = {mask: float(masses[mask]) for mask in range(1, 1 << n)}
        return EventSpace(n=n, atom_probs=atoms)
    assert k is not None
    if not 1 <= k <= (1 << n) - 1:
        raise ArgumentError(f"sparse atom count {k} outside [1, {(1 << n) - 1}]")
    chosen = rng.choice((1 << n) - 1, size=k, replace=False) + 1
    masses = rng.dirichlet(np.ones(k + 1))  # index k is the empty atom
    atoms = {int(mask): float(masses[j]) for j, mask in enumerate(sorted(chosen))}
    return EventSpace(n=n, atom_probs=atoms)
