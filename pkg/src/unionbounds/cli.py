"""Command-line front end.

Three subcommands:

* ``gen``     write a random problem file (atom form);
* ``compute`` evaluate selected bounds on a problem file;
* ``compare`` run the full comparison harness (strategy battery plus the
  random-search improvement statistics).

Problem files are JSON with a schema tag "ub-v1", in one of two forms:

    {"schema": "ub-v1", "form": "atoms", "n": 2,
     "atoms": {"1": 0.3, "2": 0.2, "3": 0.2}, "label": "demo"}

    {"schema": "ub-v1", "form": "partial", "n": 2,
     "alpha": [0.5, 0.4], "pairwise": [[0.5, 0.2], [0.2, 0.4]]}

Atom keys are decimal bitmask strings (bit i set means event i belongs to
the atom).  A weights file uses {"schema": "ub-v1", "form": "weights",
"c": [...]}.

Exit codes: 0 success, 2 input or validation error, 3 mathematically
inconsistent information (inputs no probability space can realize).

Machine output (--format json-lines) is one JSON object per line: a
header record echoing the inputs, one record per bound, optional stats
and skipped records.  It contains no wall-clock fields, so identical
inputs produce byte-identical reports; timing appears only in the human
table.  The env var UB_MAX_N raises the atom-count cap (unsafe: memory
grows as 2^n).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass
from typing import Any, Sequence, TextIO

import numpy as np

from . import bounds_classic, bounds_new
from .errors import ArgumentError, InconsistentInfo, UnionBoundsError
from .linalg import optimal_inclass_bound
from .space import EventSpace, PartialInfo, WeightVector, derive_partial_info, \
    exact_union, generate_random_space
from .weights import BoundReport, GkClipped, GkExact, KappaLine, RandomPositive, \
    SearchConfig, compare_all, gk_clipped

SCHEMA = "ub-v1"

ALL_BOUNDS = ("dc", "gk", "kat", "yat2", "lnew3", "lnew4", "unew4", "unew5", "opt")


class CliInputError(Exception):
    """Problem-file or flag validation failure (exit code 2)."""


@dataclass(frozen=True)
class Problem:
    label: str
    form: str  # "atoms" | "partial"
    info: PartialInfo
    space: EventSpace | None


def load_problem(path: str) -> Problem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise CliInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliInputError(
            f"{path} is not valid JSON (line {exc.lineno}, column {exc.colno}): "
            f"{exc.msg}"
        ) from exc
    if not isinstance(raw, dict) or raw.get("schema") != SCHEMA:
        raise CliInputError(f"{path}: missing or unsupported schema (want {SCHEMA!r})")
    form = raw.get("form")
    label = str(raw.get("label", path))
    try:
        if form == "atoms":
            n = raw["n"]
            atoms_raw = raw["atoms"]
            if not isinstance(atoms_raw, dict):
                raise CliInputError(f"{path}: field 'atoms' must be an object")
            atoms: dict[int, float] = {}
            for key, val in atoms_raw.items():
                try:
                    mask = int(key)
                except ValueError as exc:
                    raise CliInputError(
                        f"{path}: atom key {key!r} is not a decimal bitmask"
                    ) from exc
                atoms[mask] = float(val)
            space = EventSpace(n=n, atom_probs=atoms)
            return Problem(label=label, form="atoms", info=derive_partial_info(space),
                           space=space)
        if form == "partial":
            n = raw["n"]
            info = PartialInfo(n=n, alpha=np.asarray(raw["alpha"], dtype=float),
                               pairwise=np.asarray(raw["pairwise"], dtype=float))
            return Problem(label=label, form="partial", info=info, space=None)
    except KeyError as exc:
        raise CliInputError(f"{path}: missing required field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise CliInputError(f"{path}: {exc}") from exc
    except ArgumentError as exc:
        raise CliInputError(f"{path}: {exc}") from exc
    raise CliInputError(f"{path}: field 'form' must be 'atoms' or 'partial'")


def space_to_json(space: EventSpace, label: str | None = None) -> str:
    doc: dict[str, Any] = {
        "schema": SCHEMA,
        "form": "atoms",
        "n": space.n,
        "atoms": {str(mask): float(p) for mask, p in sorted(space.atom_probs.items())},
    }
    if label is not None:
        doc["label"] = label
    return json.dumps(doc, indent=2, sort_keys=True)


def info_to_json(info: PartialInfo, label: str | None = None) -> str:
    doc: dict[str, Any] = {
        "schema": SCHEMA,
        "form": "partial",
        "n": info.n,
        "alpha": [float(a) for a in info.alpha],
        "pairwise": [[float(v) for v in row] for row in info.pairwise],
    }
    if label is not None:
        doc["label"] = label
    return json.dumps(doc, indent=2, sort_keys=True)


def load_weights_file(path: str, n: int) -> WeightVector:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise CliInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliInputError(
            f"{path} is not valid JSON (line {exc.lineno}, column {exc.colno})"
        ) from exc
    if not isinstance(raw, dict) or raw.get("form") != "weights":
        raise CliInputError(f"{path}: expected a weights file (form='weights')")
    c = raw.get("c")
    if not isinstance(c, list) or len(c) != n:
        raise CliInputError(f"{path}: field 'c' must be a list of {n} numbers")
    return WeightVector.from_components([float(v) for v in c])


def resolve_weights(source: str, info: PartialInfo, eps_clip: float) -> tuple[str, WeightVector]:
    if source == "ones":
        return "ones", WeightVector.ones(info.n)
    if source == "gk":
        _, ctilde = bounds_classic.gk_bound(info)
        return "gk", ctilde
    if source == "gk+":
        return "gk+", gk_clipped(info, eps_clip)
    if source.startswith("file:"):
        path = source[len("file:"):]
        return path, load_weights_file(path, info.n)
    raise CliInputError(
        f"unknown weights source {source!r}; use ones, gk, gk+, or file:PATH"
    )


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    return value


def format_value(v: float) -> str:
    """Six decimal places; bound values live in [0, n] so this keeps at
    least six significant digits everywhere the table is read."""
    if not math.isfinite(v):
        return str(v)
    return f"{v:.6f}"


def render_table(problem: Problem, report: BoundReport, settings: dict[str, Any],
                 elapsed: float, out: TextIO) -> None:
    """Human table: lower bounds best-first, the exact union (when known)
    as a separator row, then upper bounds best-first."""
    print(f"problem: {problem.label}  (n={problem.info.n}, form={problem.form})", file=out)
    if settings:
        parts = ", ".join(f"{k}={v}" for k, v in sorted(settings.items()))
        print(f"settings: {parts}", file=out)
    lowers = sorted((e for e in report.entries if e.kind == "lower"),
                    key=lambda e: -e.value)
    uppers = sorted((e for e in report.entries if e.kind == "upper"),
                    key=lambda e: e.value)
    width = max((len(e.name) for e in report.entries), default=10) + 2
    print(file=out)
    print(f"  {'bound':<{width}}{'value':>12}  valid", file=out)
    for e in lowers:
        tick = "" if e.valid is None else ("yes" if e.valid else "NO")
        print(f"  {e.name:<{width}}{format_value(e.value):>12}  {tick}", file=out)
    if report.exact_union is not None:
        print(f"  {'exact union':<{width}}{format_value(report.exact_union):>12}  --",
              file=out)
    else:
        print(f"  {'-' * width}", file=out)
    for e in uppers:
        tick = "" if e.valid is None else ("yes" if e.valid else "NO")
        print(f"  {e.name:<{width}}{format_value(e.value):>12}  {tick}", file=out)
    if report.comparison is not None:
        c = report.comparison
        print(file=out)
        print("random-search comparison:", file=out)
        print(f"  best lnew3: {format_value(c.lnew3.best_value)}", file=out)
        print(f"  best lnew4: {format_value(c.lnew4.best_value)}", file=out)
        print(f"  lnew4 > lnew3 in {c.pct_improved:.2f}% of {c.trials} trials",
              file=out)
        mr = "n/a" if c.mean_ratio is None else format_value(c.mean_ratio)
        print(f"  mean lnew4/lnew3 ratio: {mr} over {c.ratio_trials} trials "
              f"(trials with lnew3 <= 1e-15 excluded)", file=out)
    for name, reason in report.skipped:
        print(f"  skipped {name}: {reason}", file=out)
    print(f"\nelapsed: {elapsed:.3f}s", file=out)


def render_json_lines(problem: Problem, report: BoundReport,
                      settings: dict[str, Any], out: TextIO) -> None:
    header = {
        "record": "header",
        "schema": SCHEMA,
        "label": problem.label,
        "form": problem.form,
        "n": problem.info.n,
        "alpha": [float(a) for a in problem.info.alpha],
        "pairwise": [[float(v) for v in row] for row in problem.info.pairwise],
        "exact_union": report.exact_union,
        "settings": _jsonable(settings),
    }
    print(json.dumps(header, sort_keys=True), file=out)
    for e in report.entries:
        rec = {
            "record": "bound",
            "name": e.name,
            "value": e.value,
            "kind": e.kind,
            "weights_label": e.weights_label,
            "weights": list(e.weights) if e.weights is not None else None,
            "valid": e.valid,
            "notes": _jsonable(e.notes),
        }
        print(json.dumps(rec, sort_keys=True), file=out)
    if report.comparison is not None:
        c = report.comparison
        print(json.dumps({
            "record": "stats",
            "trials": c.trials,
            "best_lnew3": c.lnew3.best_value,
            "best_lnew4": c.lnew4.best_value,
            "pct_improved": c.pct_improved,
            "mean_ratio": c.mean_ratio,
            "ratio_trials": c.ratio_trials,
            "ratio_rule": "trials with lnew3 <= 1e-15 excluded from the mean",
        }, sort_keys=True), file=out)
    for name, reason in report.skipped:
        print(json.dumps({"record": "skipped", "name": name, "reason": reason},
                         sort_keys=True), file=out)


def parse_report(text: str) -> dict[str, Any]:
    """Parse a json-lines report back into a dict structure."""
    header: dict[str, Any] | None = None
    bounds: list[dict[str, Any]] = []
    stats: dict[str, Any] | None = None
    skipped: list[dict[str, Any]] = []
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        kind = rec.get("record")
        if kind == "header":
            header = rec
        elif kind == "bound":
            bounds.append(rec)
        elif kind == "stats":
            stats = rec
        elif kind == "skipped":
            skipped.append(rec)
        else:
            raise CliInputError(f"unknown record type {kind!r}")
    if header is None:
        raise CliInputError("report has no header record")
    return {"header": header, "bounds": bounds, "stats": stats, "skipped": skipped}


def _emit(problem: Problem, report: BoundReport, settings: dict[str, Any],
          fmt: str, out_path: str | None, elapsed: float) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            if fmt == "table":
                render_table(problem, report, settings, elapsed, fh)
            else:
                render_json_lines(problem, report, settings, fh)
    else:
        if fmt == "table":
            render_table(problem, report, settings, elapsed, sys.stdout)
        else:
            render_json_lines(problem, report, settings, sys.stdout)


def _selected_bounds(selector: str) -> tuple[str, ...]:
    if selector == "all":
        return ALL_BOUNDS
    chosen = tuple(tok.strip() for tok in selector.split(",") if tok.strip())
    for tok in chosen:
        if tok not in ALL_BOUNDS:
            raise CliInputError(
                f"unknown bound {tok!r}; choose from {', '.join(ALL_BOUNDS)} or 'all'"
            )
    if not chosen:
        raise CliInputError("empty bounds selector")
    return chosen


def cmd_compute(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    if args.fptas_eps < 0:
        raise CliInputError(f"--fptas-eps must be >= 0, got {args.fptas_eps}")
    problem = load_problem(args.input)
    info = problem.info
    chosen = _selected_bounds(args.bounds)
    label, wv = resolve_weights(args.weights, info, args.eps_clip)
    fptas_eps = args.fptas_eps if args.fptas_eps > 0 else None
    exact = exact_union(problem.space) if problem.space is not None else None

    entries = []
    skipped: list[tuple[str, str]] = []

    def ok(kind: str, value: float) -> bool | None:
        if exact is None:
            return None
        return bool(value <= exact + 1e-9) if kind == "lower" else bool(value >= exact - 1e-9)

    from .weights import ReportEntry  # local alias to build the shared report type

    def add(name: str, value: float, kind: str, use_weights: bool,
            notes: dict[str, Any] | None = None) -> None:
        entries.append(ReportEntry(
            name=name, value=value, kind=kind,
            weights_label=label if use_weights else None,
            weights=tuple(map(float, wv.c)) if use_weights else None,
            valid=ok(kind, value), notes=notes or {}))

    for name in chosen:
        try:
            if name == "dc":
                add("dc", bounds_classic.dc_bound(info).value, "lower", False)
            elif name == "gk":
                bv, _ = bounds_classic.gk_bound(info)
                add("gk", bv.value, "lower", False, notes=dict(bv.notes))
            elif name == "kat":
                add("kat", bounds_classic.kat_bound(info).value, "lower", False)
            elif name == "yat2":
                add("yat2", bounds_classic.yat2_bound(info).value, "lower", False)
            elif name == "lnew3":
                add("lnew3", bounds_new.lnew3(info, wv, fptas_eps).value, "lower", True)
            elif name == "lnew4":
                add("lnew4", bounds_new.lnew4(info, wv, fptas_eps).value, "lower", True)
            elif name == "unew4":
                add("unew4", bounds_new.unew4(info, wv).value, "upper", True)
            elif name == "unew5":
                add("unew5", bounds_new.unew5(info, wv).value, "upper", True)
            elif name == "opt":
                add("opt_lower", optimal_inclass_bound(info, wv, "lower"), "lower", True)
                add("opt_upper", optimal_inclass_bound(info, wv, "upper"), "upper", True)
        except InconsistentInfo:
            raise
        except UnionBoundsError as err:
            skipped.append((name, f"{type(err).__name__}: {err}"))

    report = BoundReport(entries=tuple(entries), exact_union=exact,
                         comparison=None, skipped=tuple(skipped))
    settings = {"bounds": args.bounds, "weights": args.weights,
                "eps_clip": args.eps_clip, "fptas_eps": args.fptas_eps}
    _emit(problem, report, settings, args.format, args.out,
          time.perf_counter() - started)
    return 0


def _parse_kappa(spec: str) -> tuple[float, float, float]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise CliInputError(f"kappa grid must be lo:hi:step, got {spec!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as exc:
        raise CliInputError(f"kappa grid must be numeric lo:hi:step, got {spec!r}") from exc
    if step <= 0 or hi < lo:
        raise CliInputError(f"bad kappa grid {spec!r}: need step > 0 and hi >= lo")
    return lo, hi, step


def cmd_compare(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    if args.trials < 1:
        raise CliInputError(f"--trials must be >= 1, got {args.trials}")
    if args.fptas_eps < 0:
        raise CliInputError(f"--fptas-eps must be >= 0, got {args.fptas_eps}")
    problem = load_problem(args.input)
    lo, hi, step = _parse_kappa(args.kappa)
    fptas_eps = args.fptas_eps if args.fptas_eps > 0 else None
    configs = [
        SearchConfig(GkExact(), "both"),
        SearchConfig(GkClipped(args.eps_clip), "both"),
        SearchConfig(KappaLine(lo, hi, step), "lnew3"),
        SearchConfig(RandomPositive(args.trials, args.seed), "both"),
    ]
    report = compare_all(problem.info, configs, oracle=problem.space,
                         eps_clip=args.eps_clip, fptas_eps=fptas_eps)
    settings = {"trials": args.trials, "seed": args.seed, "kappa": args.kappa,
                "eps_clip": args.eps_clip, "fptas_eps": args.fptas_eps}
    _emit(problem, report, settings, args.format, args.out,
          time.perf_counter() - started)
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    space = generate_random_space(args.n, args.seed, args.model)
    text = space_to_json(space, label=args.label)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unionbounds",
        description="Bounds on the probability of a union of events from "
                    "marginal and weighted pairwise-intersection information.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_compute = sub.add_parser("compute", help="evaluate bounds on a problem file")
    p_compute.add_argument("--input", required=True, help="problem file (ub-v1 JSON)")
    p_compute.add_argument("--bounds", default="all",
                           help="'all' or comma list of " + ",".join(ALL_BOUNDS))
    p_compute.add_argument("--weights", default="ones",
                           help="ones | gk | gk+ | file:PATH")
    p_compute.add_argument("--eps-clip", type=float, default=1e-6, dest="eps_clip")
    p_compute.add_argument("--fptas-eps", type=float, default=0.0, dest="fptas_eps",
                           help="approximation tolerance; 0 means exact")
    p_compute.add_argument("--format", choices=("table", "json-lines"),
                           default="table")
    p_compute.add_argument("--out", default=None, help="write report here")
    p_compute.set_defaults(func=cmd_compute)

    p_compare = sub.add_parser("compare", help="run the comparison harness")
    p_compare.add_argument("--input", required=True)
    p_compare.add_argument("--trials", type=int, default=1000)
    p_compare.add_argument("--seed", type=int, default=0)
    p_compare.add_argument("--kappa", default="-1:1:0.005",
                           help="line-search grid lo:hi:step")
    p_compare.add_argument("--eps-clip", type=float, default=1e-6, dest="eps_clip")
    p_compare.add_argument("--fptas-eps", type=float, default=0.0, dest="fptas_eps")
    p_compare.add_argument("--format", choices=("table", "json-lines"),
                           default="table")
    p_compare.add_argument("--out", default=None)
    p_compare.set_defaults(func=cmd_compare)

    p_gen = sub.add_parser("gen", help="generate a random problem file")
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--model", default="dirichlet",
                       help="dirichlet or sparse:K")
    p_gen.add_argument("--label", default=None)
    p_gen.add_argument("--out", default=None)
    p_gen.set_defaults(func=cmd_gen)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except CliInputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except InconsistentInfo as err:
        print(f"inconsistent information: {err}", file=sys.stderr)
        return 3
    except UnionBoundsError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
