"""Weight-vector selection strategies and the bound-comparison harness.

The selection-based bound classes take a weight vector; picking a good one
is a search problem.  Four strategies are provided, mirroring how such
bounds are exercised in practice:

* GkExact: the weights solving the optimal-quadratic-weighting system,
  used as-is (they may carry negative or invalid entries);
* GkClipped: the same weights with every component clipped up to a small
  positive floor, so the positive-only bounds apply;
* KappaLine: a line search over a uniform shift of the base weights,
  evaluated on an inclusive grid;
* RandomPositive: seeded i.i.d. uniform(0, 1] vectors, each trial drawn
  from its own generator derived from (seed, trial index), so results do
  not depend on evaluation order.

Everything is deterministic for fixed inputs and configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .bounds_classic import dc_bound, gk_bound, kat_bound, yat2_bound
from .bounds_new import lnew3, lnew4, unew4, unew5
from .errors import ArgumentError, UnionBoundsError
from .linalg import optimal_inclass_bound
from .space import Classification, EventSpace, PartialInfo, WeightVector, \
    derive_partial_info, exact_union

# Strict-improvement margin for the "second class beats the first" count.
IMPROVEMENT_TOL = 1e-12

# Trials whose first-class bound is at most this are left out of the mean
# ratio (the ratio is undefined there); the report carries the counts.
RATIO_FLOOR = 1e-15

_ORACLE_TOL = 1e-9


@dataclass(frozen=True)
class GkExact:
    pass


@dataclass(frozen=True)
class GkClipped:
    eps_clip: float = 1e-6

    def __post_init__(self) -> None:
        if not self.eps_clip > 0:
            raise ArgumentError(f"eps_clip must be positive, got {self.eps_clip!r}")


@dataclass(frozen=True)
class KappaLine:
    lo: float = -1.0
    hi: float = 1.0
    step: float = 0.005

    def __post_init__(self) -> None:
        if not self.step > 0:
            raise ArgumentError(f"step must be positive, got {self.step!r}")
        if self.hi < self.lo:
            raise ArgumentError(f"empty grid: hi={self.hi} < lo={self.lo}")


@dataclass(frozen=True)
class RandomPositive:
    trials: int
    seed: int

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ArgumentError(f"trials must be >= 1, got {self.trials!r}")


Strategy = GkExact | GkClipped | KappaLine | RandomPositive


@dataclass(frozen=True)
class SearchConfig:
    strategy: Strategy
    bound_family: str = "lnew3"  # "lnew3" | "lnew4" | "both"

    def __post_init__(self) -> None:
        if self.bound_family not in ("lnew3", "lnew4", "both"):
            raise ArgumentError(f"unknown bound family {self.bound_family!r}")


@dataclass(frozen=True)
class SearchResult:
    """Outcome of one search: the best value seen and where it was seen.

    ``trace`` entry values are None where evaluation was skipped (invalid
    weights on a grid point).  With nothing evaluable, best_value is -inf
    and best_weights is None.
    """

    best_value: float
    best_weights: WeightVector | None
    trace: tuple[tuple[float, float | None], ...] | None
    evaluations: int


@dataclass(frozen=True)
class RandomComparison:
    """Joint random-search outcome for both bound classes, with the
    improvement statistics of the second class over the first.

    Inclusion rules: every trial counts toward pct_improved (strict
    improvement by more than IMPROVEMENT_TOL); the mean ratio averages
    lnew4/lnew3 over trials whose lnew3 exceeds RATIO_FLOOR, and
    ratio_trials says how many that was.
    """

    lnew3: SearchResult
    lnew4: SearchResult
    trials: int
    pct_improved: float
    mean_ratio: float | None
    ratio_trials: int


def gk_clipped(info: PartialInfo, eps: float = 1e-6) -> WeightVector:
    """Optimal-quadratic weights clipped componentwise up to eps > 0.

    With eps small enough this is the identity whenever the solved weights
    are already all positive.
    """
    if not eps > 0:
        raise ArgumentError(f"eps must be positive, got {eps!r}")
    _, ctilde = gk_bound(info)
    clipped = np.maximum(ctilde.c, eps)
    return WeightVector(clipped, Classification.ALL_POSITIVE)


def kappa_line_search(info: PartialInfo, base: WeightVector, lo: float = -1.0,
                      hi: float = 1.0, step: float = 0.005) -> SearchResult:
    """Evaluate the first bound class at base + kappa * ones on the
    inclusive grid lo, lo+step, ..., hi; invalid grid points are recorded
    in the trace as skipped.  Ties go to the smallest kappa.
    """
    if not step > 0:
        raise ArgumentError(f"step must be positive, got {step!r}")
    if hi < lo:
        raise ArgumentError(f"empty grid: hi={hi} < lo={lo}")
    count = int(round((hi - lo) / step)) + 1
    trace: list[tuple[float, float | None]] = []
    best_value = -math.inf
    best_weights: WeightVector | None = None
    evaluations = 0
    for j in range(count):
        kappa = lo + j * step
        wv = WeightVector.from_components(base.c + kappa)
        if not wv.is_valid:
            trace.append((kappa, None))
            continue
        value = lnew3(info, wv).value
        evaluations += 1
        trace.append((kappa, value))
        if value > best_value:
            best_value = value
            best_weights = wv
    return SearchResult(best_value=best_value, best_weights=best_weights,
                        trace=tuple(trace), evaluations=evaluations)


def _trial_weights(n: int, seed: int, trial: int) -> WeightVector:
    rng = np.random.default_rng([seed, trial])
    c = 1.0 - rng.random(n)  # uniform on (0, 1]: all positive
    return WeightVector(c, Classification.ALL_POSITIVE)


def random_search(info: PartialInfo, trials: int, seed: int,
                  family: str = "lnew3", keep_trace: bool = False,
                  ) -> SearchResult | RandomComparison:
    """Seeded random search over positive weight vectors.

    family "lnew3" or "lnew4" returns a SearchResult for that class;
    "both" evaluates the two classes on the same draws and returns a
    RandomComparison carrying both results and the improvement statistics.
    Deterministic in (info, trials, seed) and independent of evaluation
    order, because each trial derives its own generator.
    """
    if trials < 1:
        raise ArgumentError(f"trials must be >= 1, got {trials!r}")
    if family not in ("lnew3", "lnew4", "both"):
        raise ArgumentError(f"unknown bound family {family!r}")
    which = ("lnew3", "lnew4") if family == "both" else (family,)
    best = {name: (-math.inf, None) for name in which}
    traces: dict[str, list[tuple[float, float | None]]] = {name: [] for name in which}
    improved = 0
    ratio_sum = 0.0
    ratio_trials = 0
    evaluations = 0
    for t in range(trials):
        wv = _trial_weights(info.n, seed, t)
        vals = {}
        for name in which:
            fn = lnew3 if name == "lnew3" else lnew4
            vals[name] = fn(info, wv).value
            evaluations += 1
            if keep_trace:
                traces[name].append((float(t), vals[name]))
            if vals[name] > best[name][0]:
                best[name] = (vals[name], wv)
        if family == "both":
            if vals["lnew4"] > vals["lnew3"] + IMPROVEMENT_TOL:
                improved += 1
            if vals["lnew3"] > RATIO_FLOOR:
                ratio_sum += vals["lnew4"] / vals["lnew3"]
                ratio_trials += 1
    results = {
        name: SearchResult(
            best_value=best[name][0],
            best_weights=best[name][1],
            trace=tuple(traces[name]) if keep_trace else None,
            evaluations=trials,
        )
        for name in which
    }
    if family != "both":
        return results[family]
    return RandomComparison(
        lnew3=results["lnew3"],
        lnew4=results["lnew4"],
        trials=trials,
        pct_improved=100.0 * improved / trials,
        mean_ratio=(ratio_sum / ratio_trials) if ratio_trials else None,
        ratio_trials=ratio_trials,
    )


@dataclass(frozen=True)
class ReportEntry:
    name: str
    value: float
    kind: str  # "lower" | "upper"
    weights_label: str | None = None
    weights: tuple[float, ...] | None = None
    valid: bool | None = None
    notes: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class BoundReport:
    """Every computed bound for one problem, plus optional ground truth
    and random-comparison statistics."""

    entries: tuple[ReportEntry, ...]
    exact_union: float | None = None
    comparison: RandomComparison | None = None
    skipped: tuple[tuple[str, str], ...] = ()

    def value(self, name: str) -> float:
        for e in self.entries:
            if e.name == name:
                return e.value
        raise KeyError(name)


def compare_all(info: PartialInfo, configs: Sequence[SearchConfig] | SearchConfig,
                oracle: EventSpace | None = None, eps_clip: float = 1e-6,
                fptas_eps: float | None = None) -> BoundReport:
    """Evaluate the full bound battery plus each configured strategy.

    Weight-free bounds and the unit-weight members always run; the optimal
    in-class LP bounds run when the atom count allows.  When an oracle
    space is supplied it must reduce to ``info``, and every entry gets a
    validity flag against the exact union probability.
    """
    if isinstance(configs, SearchConfig):
        configs = [configs]
    exact: float | None = None
    if oracle is not None:
        derived = derive_partial_info(oracle)
        gap = max(
            float(np.max(np.abs(derived.alpha - info.alpha))),
            float(np.max(np.abs(derived.pairwise - info.pairwise))),
        )
        if gap > _ORACLE_TOL:
            raise ArgumentError(
                f"oracle space does not match the partial info (gap {gap})"
            )
        exact = exact_union(oracle)

    entries: list[ReportEntry] = []
    skipped: list[tuple[str, str]] = []
    comparison: RandomComparison | None = None

    def ok(kind: str, value: float) -> bool | None:
        if exact is None:
            return None
        if kind == "lower":
            return bool(value <= exact + _ORACLE_TOL)
        return bool(value >= exact - _ORACLE_TOL)

    def add(name: str, value: float, kind: str, label: str | None = None,
            weights: WeightVector | None = None, notes: dict[str, Any] | None = None,
            ) -> None:
        entries.append(ReportEntry(
            name=name, value=value, kind=kind, weights_label=label,
            weights=tuple(map(float, weights.c)) if weights is not None else None,
            valid=ok(kind, value), notes=notes or {},
        ))

    def attempt(name: str, fn) -> None:
        try:
            fn()
        except UnionBoundsError as err:
            skipped.append((name, f"{type(err).__name__}: {err}"))

    ones = WeightVector.ones(info.n)
    add("dc", dc_bound(info).value, "lower")
    add("kat", kat_bound(info).value, "lower")
    attempt("yat2", lambda: add("yat2", yat2_bound(info).value, "lower"))
    gk_value, ctilde = gk_bound(info)
    add("gk", gk_value.value, "lower", label="gk", weights=ctilde,
        notes=dict(gk_value.notes))
    attempt("unew4[ones]", lambda: add("unew4[ones]", unew4(info, ones).value,
                                       "upper", label="ones", weights=ones))
    attempt("unew5[ones]", lambda: add("unew5[ones]", unew5(info, ones).value,
                                       "upper", label="ones", weights=ones))
    if info.n <= 20:
        attempt("opt_lower", lambda: add(
            "opt_lower", optimal_inclass_bound(info, ones, "lower"), "lower",
            label="ones"))
        attempt("opt_upper", lambda: add(
            "opt_upper", optimal_inclass_bound(info, ones, "upper"), "upper",
            label="ones"))
    else:
        skipped.append(("opt_lower", "n > 20"))
        skipped.append(("opt_upper", "n > 20"))

    for config in configs:
        strat = config.strategy
        want3 = config.bound_family in ("lnew3", "both")
        want4 = config.bound_family in ("lnew4", "both")
        if isinstance(strat, GkExact):
            if not ctilde.is_valid:
                skipped.append(("lnew3[gk]", "solved weights are invalid"))
                continue
            if want3:
                attempt("lnew3[gk]", lambda: add(
                    "lnew3[gk]", lnew3(info, ctilde, fptas_eps).value, "lower",
                    label="gk", weights=ctilde))
            if want4:
                if ctilde.all_positive:
                    attempt("lnew4[gk]", lambda: add(
                        "lnew4[gk]", lnew4(info, ctilde, fptas_eps).value,
                        "lower", label="gk", weights=ctilde))
                else:
                    skipped.append(("lnew4[gk]", "solved weights not all positive"))
        elif isinstance(strat, GkClipped):
            cp = gk_clipped(info, strat.eps_clip)
            if want3:
                attempt("lnew3[gk+]", lambda: add(
                    "lnew3[gk+]", lnew3(info, cp, fptas_eps).value, "lower",
                    label="gk+", weights=cp))
            if want4:
                attempt("lnew4[gk+]", lambda: add(
                    "lnew4[gk+]", lnew4(info, cp, fptas_eps).value, "lower",
                    label="gk+", weights=cp))
        elif isinstance(strat, KappaLine):
            res = kappa_line_search(info, ctilde, strat.lo, strat.hi, strat.step)
            if res.best_weights is None:
                skipped.append(("lnew3[gk+kappa]", "every grid point invalid"))
            else:
                best_kappa = max(
                    (v, -k) for k, v in res.trace if v is not None
                )
                add("lnew3[gk+kappa]", res.best_value, "lower", label="gk+kappa",
                    weights=res.best_weights,
                    notes={"kappa": -best_kappa[1], "evaluations": res.evaluations})
        elif isinstance(strat, RandomPositive):
            fam = config.bound_family
            out = random_search(info, strat.trials, strat.seed, family=fam)
            if isinstance(out, RandomComparison):
                comparison = out
                add("lnew3[rand]", out.lnew3.best_value, "lower", label="rand",
                    weights=out.lnew3.best_weights,
                    notes={"trials": strat.trials, "seed": strat.seed})
                add("lnew4[rand]", out.lnew4.best_value, "lower", label="rand",
                    weights=out.lnew4.best_weights,
                    notes={"trials": strat.trials, "seed": strat.seed})
            else:
                add(f"{fam}[rand]", out.best_value, "lower", label="rand",
                    weights=out.best_weights,
                    notes={"trials": strat.trials, "seed": strat.seed})
        else:
            raise ArgumentError(f"unknown strategy {strat!r}")

    return BoundReport(entries=tuple(entries), exact_union=exact,
                       comparison=comparison, skipped=tuple(skipped))
