"""Minimal dense linear-algebra and LP kernel.

Two jobs only, both at desk scale:

* solve symmetric linear systems (the optimal-quadratic-weighting vector
  comes from one), in a least-squares sense when singular, and
* solve small dense LPs in equality standard form (min/max c.x subject to
  A x = b, x >= 0) with a deterministic two-phase simplex under Bland's
  rule.  Determinism and simplicity are the point; speed is not.

Matrices are plain 2-D float numpy arrays (row-major dense storage).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ArgumentError, DimensionMismatch, InconsistentInfo
from .space import PartialInfo, WeightVector, membership_matrix

# Feasibility tolerance used across the LP code.  Atom sums carry roughly
# 1e-12 of rounding; a margin of 1e3 keeps checks robust.
FEAS_TOL = 1e-9

_PIVOT_TOL = 1e-11

MAX_LP_VARS = 1 << 20
MAX_LP_CONS = 64


class LinearSolution(NamedTuple):
    x: np.ndarray
    residual: float  # Euclidean norm of a x - b


def solve_linear_system(a: np.ndarray, b: Sequence[float] | np.ndarray) -> LinearSolution:
    """Solve a x = b, falling back to least squares when rank-deficient.

    The primary path is Gaussian elimination with partial pivoting.  If a
    pivot collapses (singular or nearly singular matrix), the minimum-norm
    least-squares pseudo-solution is returned instead; either way the
    residual norm is reported alongside the solution.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float).ravel()
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(
            f"rhs has length {b.shape[0]}, matrix is {a.shape[0]}x{a.shape[1]}"
        )
    n = a.shape[0]
    scale = np.max(np.abs(a)) if a.size else 0.0
    u = a.copy()
    y = b.copy()
    singular = scale == 0.0
    if not singular:
        for k in range(n):
            p = k + int(np.argmax(np.abs(u[k:, k])))
            if abs(u[p, k]) <= _PIVOT_TOL * scale:
                singular = True
                break
            if p != k:
                u[[k, p]] = u[[p, k]]
                y[[k, p]] = y[[p, k]]
            factors = u[k + 1 :, k] / u[k, k]
            u[k + 1 :, k:] -= factors[:, None] * u[k, k:]
            y[k + 1 :] -= factors * y[k]
    if singular:
        x = np.linalg.lstsq(a, b, rcond=None)[0]
    else:
        x = np.zeros(n)
        for k in range(n - 1, -1, -1):
            x[k] = (y[k] - u[k, k + 1 :] @ x[k + 1 :]) / u[k, k]
    residual = float(np.linalg.norm(a @ x - b))
    return LinearSolution(x=x, residual=residual)


@dataclass(frozen=True)
class LpProblem:
    """min or max objective.x subject to eq_matrix x = eq_rhs, x >= 0."""

    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    sense: str = "min"

    def __post_init__(self) -> None:
        obj = np.asarray(self.objective, dtype=float).ravel()
        mat = np.asarray(self.eq_matrix, dtype=float)
        rhs = np.asarray(self.eq_rhs, dtype=float).ravel()
        if self.sense not in ("min", "max"):
            raise ArgumentError(f"sense must be 'min' or 'max', got {self.sense!r}")
        if mat.ndim != 2:
            raise DimensionMismatch(f"eq_matrix must be 2-D, got shape {mat.shape}")
        m, nv = mat.shape
        if obj.shape[0] != nv or rhs.shape[0] != m:
            raise DimensionMismatch(
                f"inconsistent LP dimensions: matrix {mat.shape}, "
                f"objective {obj.shape[0]}, rhs {rhs.shape[0]}"
            )
        if nv > MAX_LP_VARS or m > MAX_LP_CONS:
            raise ArgumentError(
                f"problem size {m}x{nv} exceeds caps {MAX_LP_CONS}x{MAX_LP_VARS}"
            )
        if not (
            np.all(np.isfinite(obj)) and np.all(np.isfinite(mat)) and np.all(np.isfinite(rhs))
        ):
            raise ArgumentError("LP data must be finite")
        for name, arr in (("objective", obj), ("eq_matrix", mat), ("eq_rhs", rhs)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float
    primal: np.ndarray

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _simplex(tab: np.ndarray, basis: list[int], ncols: int) -> str:
    """Run simplex on a tableau whose last row holds reduced costs (min
    convention: entering column has reduced cost < -FEAS_TOL) and last
    column holds the rhs.  Mutates tab and basis; returns "optimal" or
    "unbounded".

    Pivoting is deterministic: the most-negative reduced cost enters
    (smallest index on ties) while the objective makes progress, and after
    a degeneracy stall the rule switches permanently to Bland's
    (first negative index), which cannot cycle.
    """
    m = tab.shape[0] - 1
    bland = False
    stall = 0
    last_obj = tab[-1, -1]
    max_iter = 10_000 + 200 * (m + 1)
    for _ in range(max_iter):
        costs = tab[-1, :ncols]
        if bland:
            neg = np.flatnonzero(costs < -FEAS_TOL)
            if neg.size == 0:
                return "optimal"
            enter = int(neg[0])
        else:
            enter = int(np.argmin(costs))
            if costs[enter] >= -FEAS_TOL:
                return "optimal"
        col = tab[:m, enter]
        rows = np.flatnonzero(col > _PIVOT_TOL)
        if rows.size == 0:
            return "unbounded"
        ratios = tab[rows, -1] / col[rows]
        best = float(np.min(ratios))
        tied = rows[ratios <= best + 1e-12]
        leave = int(min(tied, key=lambda r: basis[r]))
        piv = tab[leave, enter]
        tab[leave] /= piv
        update = tab[:, enter].copy()
        update[leave] = 0.0
        tab -= np.outer(update, tab[leave])
        tab[:, enter] = 0.0
        tab[leave, enter] = 1.0
        basis[leave] = enter
        # Basic values cannot be negative in exact arithmetic; rounding
        # residue there would feed negative ratios into later ratio tests
        # and defeat Bland's termination argument at degenerate vertices.
        rhs = tab[:m, -1]
        rhs[(rhs < 0.0) & (rhs > -FEAS_TOL)] = 0.0
        if not bland:
            if tab[-1, -1] > last_obj - 1e-12:
                stall += 1
                if stall > 2 * (m + 1):
                    bland = True
            else:
                stall = 0
            last_obj = tab[-1, -1]
    raise RuntimeError(f"simplex failed to converge within {max_iter} iterations")


def solve_lp(p: LpProblem) -> LpSolution:
    """Two-phase simplex, deterministic, with Bland anti-cycling.

    Optimal solutions are basic feasible solutions.  Infeasible and
    unbounded problems come back as statuses, not exceptions.
    """
    a = np.array(p.eq_matrix)
    b = np.array(p.eq_rhs)
    c = np.array(p.objective, dtype=float)
    if p.sense == "max":
        c = -c
    m, nv = a.shape

    flip = b < 0
    a[flip] *= -1.0
    b = np.abs(b)

    # Phase 1: artificial variables form the starting basis.
    tab = np.zeros((m + 1, nv + m + 1))
    tab[:m, :nv] = a
    tab[:m, nv : nv + m] = np.eye(m)
    tab[:m, -1] = b
    tab[-1, :nv] = -a.sum(axis=0)
    tab[-1, -1] = -b.sum()
    basis = list(range(nv, nv + m))
    status = _simplex(tab, basis, nv + m)
    if status != "optimal" or -tab[-1, -1] > FEAS_TOL:
        return LpSolution(status="infeasible", value=np.nan, primal=np.zeros(nv))

    # Drive leftover artificials out of the basis; rows that cannot pivot
    # on an original column are redundant constraints.
    keep = []
    for r in range(m):
        if basis[r] >= nv:
            pivot_col = -1
            for j in range(nv):
                if abs(tab[r, j]) > 1e-7:
                    pivot_col = j
                    break
            if pivot_col < 0:
                continue
            piv = tab[r, pivot_col]
            tab[r] /= piv
            col = tab[:, pivot_col].copy()
            col[r] = 0.0
            tab -= np.outer(col, tab[r])
            tab[:, pivot_col] = 0.0
            tab[r, pivot_col] = 1.0
            basis[r] = pivot_col
        keep.append(r)

    rows = [r for r in keep]
    tab2 = np.zeros((len(rows) + 1, nv + 1))
    tab2[: len(rows), :nv] = tab[rows][:, :nv]
    tab2[: len(rows), -1] = tab[rows][:, -1]
    basis2 = [basis[r] for r in rows]

    # Phase 2: rebuild reduced costs for the real objective.
    tab2[-1, :nv] = c
    tab2[-1, -1] = 0.0
    for r, bv in enumerate(basis2):
        if abs(c[bv]) > 0:
            tab2[-1, :] -= c[bv] * tab2[r, :]
    status = _simplex(tab2, basis2, nv)
    if status == "unbounded":
        return LpSolution(status="unbounded", value=np.nan, primal=np.zeros(nv))

    # Refactorize: on heavily degenerate problems the pivot sequence leaves
    # rounding drift in the tableau, so recompute the basic solution for
    # the final basis straight from the constraint data.
    x = np.zeros(nv)
    sub = a[rows][:, basis2]
    rhs_kept = b[np.asarray(rows, dtype=int)]
    try:
        x_basic = np.linalg.solve(sub, rhs_kept)
    except np.linalg.LinAlgError:
        x_basic = np.linalg.lstsq(sub, rhs_kept, rcond=None)[0]
    if not np.all(np.isfinite(x_basic)):
        x_basic = np.linalg.lstsq(sub, rhs_kept, rcond=None)[0]
    for bv, val in zip(basis2, x_basic):
        x[bv] = val
    np.clip(x, 0.0, None, out=x)
    value = float(np.asarray(p.objective) @ x)
    return LpSolution(status="optimal", value=value, primal=x)


def optimal_inclass_bound(info: PartialInfo, w: WeightVector, sense: str) -> float:
    """Best bound obtainable from exactly this information, by LP.

    Optimizes the union mass sum(p_B) over all p >= 0 matching, for each
    event i, both its probability and its weighted pairwise sum.  "lower"
    minimizes, "upper" maximizes.  Every closed-form bound consuming the
    same (alpha, gamma(c)) information is dominated by this value.
    """
    if sense not in ("lower", "upper"):
        raise ArgumentError(f"sense must be 'lower' or 'upper', got {sense!r}")
    n = info.n
    if n > 20:
        raise ArgumentError(f"optimal in-class bound needs n <= 20, got {n}")
    if not w.is_valid:
        raise ArgumentError("weight vector must satisfy the nonzero-subset-sum condition")
    if w.n != n:
        raise DimensionMismatch(f"weights have n={w.n}, info has n={n}")
    masks = np.arange(1, 1 << n, dtype=np.int64)
    mem = membership_matrix(n, masks)
    s = w.c @ mem
    eq = np.vstack([mem, mem * s[None, :]])
    rhs = np.concatenate([info.alpha, info.gamma_vector(w)])
    prob = LpProblem(
        objective=np.ones(masks.size),
        eq_matrix=eq,
        eq_rhs=rhs,
        sense="min" if sense == "lower" else "max",
    )
    sol = solve_lp(prob)
    if sol.status == "infeasible":
        raise InconsistentInfo(
            "no probability space realizes the given (alpha, pairwise) under these weights"
        )
    if not sol.optimal:
        raise InconsistentInfo(f"in-class LP ended with status {sol.status}")
    return sol.value
