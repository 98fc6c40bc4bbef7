"""Command-line front end.

Exit codes: 0 success, 1 run finished but did not succeed (non-optimal
status, failed benchmark row), 2 usage error, 3 backend or environment
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__
from .algorithms import SimplifiedParams, Status, cegio_f, cegio_g, cegio_s
from .backend import CONFIG_ENV, DEFAULT_CAP, EnumBackend, SmtBackend, resolve_solver
from .baselines import BaselineParams, pattern_search, simulated_annealing
from .benchlib import TAGS, BenchmarkSpec, list_benchmarks, load_catalog, lookup
from .errors import (
    BackendError, BenchmarkNotFound, CapExceededError, EncodingError, ExprSyntaxError,
    GridError, LowerBoundViolation,
)
from .expr import parse, variables
from .grid import parse_box
from .records import dumps, rational, run_record

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BACKEND = 0, 1, 2, 3


class UsageError(Exception):
    pass


# --- shared option groups -------------------------------------------------

def _add_problem(p: argparse.ArgumentParser, required: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--bench", help="benchmark key, name or id")
    src.add_argument("--expr", help="objective over x0, x1, ...")
    p.add_argument("--box", help='domain, e.g. "x0:-2:2,x1:-1:1" or "-2:2" for every axis')
    p.add_argument("--catalog", help="benchmark catalog file to use instead of the bundled one")


def _add_solver(p: argparse.ArgumentParser, algos: str = "g,s,f") -> None:
    p.add_argument("--algo", default="g", help=f"algorithm: {algos}")
    p.add_argument("--eta", type=int, default=2, help="decimal places of the finest grid (default 2)")
    p.add_argument("--backend", default="enum", help="'enum' or a solver tag (default enum)")
    p.add_argument("--solvers-config", help=f"solver INI file (default ${CONFIG_ENV})")
    p.add_argument("--alpha", type=int, default=10, help="bands per step for --algo s (default 10)")
    p.add_argument("--fm", default="0", help="known lower bound for --algo s (default 0)")
    p.add_argument("--timeout", type=float, help="per-query solver timeout in seconds")
    p.add_argument("--seed", type=int, help="random initial grid point")
    p.add_argument("--budget", type=int, help="maximum number of queries")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP,
                   help=f"enumerator grid-size cap, 0 for none (default {DEFAULT_CAP})")


def _add_output(p: argparse.ArgumentParser, fmt: str = "json") -> None:
    p.add_argument("--out", help="directory for result files (created if missing)")
    p.add_argument("--format", choices=("json", "csv"), default=fmt)


# --- problem and backend resolution ----------------------------------------

def _catalog(args) -> Optional[dict[str, BenchmarkSpec]]:
    return load_catalog(args.catalog) if getattr(args, "catalog", None) else None


def _problem(args):
    """``(objective, box, expr_text, benchmark_info, spec)`` from --bench or --expr/--box."""
    if args.bench:
        try:
            spec = lookup(args.bench, _catalog(args))
        except BenchmarkNotFound as exc:
            raise UsageError(str(exc.args[0])) from exc
        box = parse_box(args.box, dim=spec.dim) if args.box else spec.box
        info = {"key": spec.key, "id": spec.id, "name": spec.name}
        return spec.objective, box, spec.expr_text, info, spec
    if not args.box:
        raise UsageError("--expr needs --box")
    f = parse(args.expr)
    dim = max(variables(f), default=0) + 1
    return f, parse_box(args.box, dim=dim), args.expr, None, None


def _backend(args):
    if args.backend == "enum":
        return EnumBackend(cap=args.cap or None)
    cfg = resolve_solver(args.backend, args.solvers_config)
    if args.timeout:
        cfg = cfg.with_timeout(args.timeout)
    return SmtBackend(cfg)


def _algorithms(text: str, allowed: str) -> list[str]:
    algos = [a.strip() for a in text.split(",") if a.strip()]
    bad = [a for a in algos if a not in allowed.split(",")]
    if not algos or bad:
        raise UsageError(f"--algo must be one of {allowed} (got {text!r})")
    return algos


def _init(text: Optional[str]) -> Optional[tuple[Fraction, ...]]:
    if not text:
        return None
    try:
        return tuple(Fraction(c.strip()) for c in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad --init point {text!r}") from exc


def _solve(algo: str, f, box, eta, backend, args, init=None, spec: Optional[BenchmarkSpec] = None):
    if algo == "auto":
        algo = "f" if spec is not None and "convex" in spec.tags else "g"
    kw = dict(init=init, seed=args.seed, budget=args.budget)
    if algo == "g":
        return cegio_g(f, box, eta, backend, **kw)
    if algo == "f":
        return cegio_f(f, box, eta, backend, **kw)
    params = SimplifiedParams(alpha=args.alpha, f_m=Fraction(args.fm))
    return cegio_s(f, box, eta, params, backend, **kw)


def _params(args, algo: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    if algo == "s":
        out = {"alpha": args.alpha, "f_m": rational(Fraction(args.fm))}
    if args.budget is not None:
        out["budget"] = args.budget
    return out


def _outdir(path: Optional[str]) -> Optional[Path]:
    if not path:
        return None
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc.strerror}") from exc
    if not os.access(p, os.W_OK):
        raise OSError(f"output directory {path} is not writable")
    return p


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _csv(rows: list[dict[str, Any]], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# --- run --------------------------------------------------------------------

RUN_FIELDS = ("benchmark", "algorithm", "backend", "eta", "status", "value", "value_decimal",
              "minimizer", "queries", "volume", "elapsed_seconds")


def cmd_run(args) -> int:
    algo = _algorithms(args.algo, "g,s,f")
    if len(algo) != 1:
        raise UsageError("run takes a single --algo")
    f, box, text, info, spec = _problem(args)
    backend = _backend(args)
    out = _outdir(args.out)
    result = _solve(algo[0], f, box, args.eta, backend, args, init=_init(args.init), spec=spec)
    record = run_record(result, benchmark=info, expr=text, box=box, seed=args.seed,
                        params=_params(args, algo[0]))
    if args.format == "json":
        body = dumps(record) + "\n"
    else:
        body = _csv([{
            "benchmark": info["key"] if info else "",
            "algorithm": record["algorithm"], "backend": record["backend"], "eta": record["eta"],
            "status": record["status"], "value": record["value"]["exact"],
            "value_decimal": record["value"]["decimal"],
            "minimizer": " ".join(c["exact"] for c in record["minimizer"]),
            "queries": record["queries"], "volume": record["volume"],
            "elapsed_seconds": record["elapsed_seconds"],
        }], RUN_FIELDS)
    sys.stdout.write(body)
    if out is not None:
        _write(out / f"run.{args.format}", body)
    if result.status in (Status.SOLVER_UNKNOWN, Status.TIMED_OUT):
        print(f"cegio: {result.status.value}: {result.message}", file=sys.stderr)
        return EXIT_BACKEND
    return EXIT_OK if result.ok else EXIT_FAIL


# --- bench ------------------------------------------------------------------

BENCH_FIELDS = ("id", "key", "name", "algorithm", "backend", "eta", "status", "value", "value_decimal",
                "reference", "abs_error", "allowance", "pass", "queries", "repeats", "elapsed_seconds",
                "error")


def _bench_row(job) -> dict[str, Any]:
    spec, algo, args = job
    row: dict[str, Any] = {
        "id": spec.id, "key": spec.key, "name": spec.name, "algorithm": algo,
        "backend": args.backend, "eta": args.eta, "repeats": args.repeat, "error": "",
        "reference": rational(spec.reference(args.eta))["exact"],
        "allowance": rational(spec.allowance(args.eta))["decimal"],
    }
    try:
        backend = _backend(args)
        times, results = [], []
        for i in range(args.repeat):
            t0 = time.perf_counter()
            sub = argparse.Namespace(**vars(args))
            if args.seed is not None:
                sub.seed = args.seed + i
            results.append(_solve(algo, spec.objective, spec.box, args.eta, backend, sub, spec=spec))
            times.append(time.perf_counter() - t0)
        first = results[0]
        err = abs(first.value - spec.reference(args.eta))
        row.update(
            algorithm=first.algorithm if algo == "auto" else algo,
            status=first.status.value,
            value=rational(first.value)["exact"],
            value_decimal=rational(first.value)["decimal"],
            abs_error=rational(err)["decimal"],
            queries=first.queries,
            elapsed_seconds=round(sum(times) / len(times), 6),
        )
        row["pass"] = all(r.ok and spec.passes(r.value, args.eta) for r in results)
    except (BackendError, CapExceededError, EncodingError, LowerBoundViolation, GridError) as exc:
        row.update(status="Error", error=f"{type(exc).__name__}: {exc}", **{"pass": False})
    return row


def cmd_bench(args) -> int:
    tags: set[str] = set()
    for chunk in args.filter or []:
        tags.update(t.strip() for t in chunk.split(",") if t.strip())
    unknown = tags - TAGS
    if unknown:
        raise UsageError(f"unknown tag(s) {sorted(unknown)}; known: {', '.join(sorted(TAGS))}")
    specs = list_benchmarks(tags, _catalog(args))
    if args.ids:
        wanted = {int(i) for i in args.ids.split(",")}
        specs = [s for s in specs if s.id in wanted]
    if not specs:
        raise UsageError("no benchmark matches the filter")
    if args.repeat < 1:
        raise UsageError("--repeat must be at least 1")
    algos = _algorithms(args.algo, "g,s,f,auto")
    if args.backend != "enum":
        resolve_solver(args.backend, args.solvers_config)
    out = _outdir(args.out)
    jobs = [(s, a, args) for s in specs for a in algos]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_row, jobs))
    else:
        rows = [_bench_row(j) for j in jobs]
    order = {a: i for i, a in enumerate(algos)}
    rows.sort(key=lambda r: (r["id"] is None, r["id"] or 0, r["key"], order.get(r["algorithm"], 0)))
    csv_text = _csv(rows, BENCH_FIELDS)
    jsonl = "".join(json.dumps({k: r.get(k) for k in BENCH_FIELDS}, sort_keys=True) + "\n" for r in rows)
    sys.stdout.write(csv_text if args.format == "csv" else jsonl)
    if out is not None:
        _write(out / "bench.csv", csv_text)
        _write(out / "bench.jsonl", jsonl)
    passed = sum(bool(r["pass"]) for r in rows)
    print(f"{passed}/{len(rows)} rows pass", file=sys.stderr)
    return EXIT_OK if passed == len(rows) else EXIT_FAIL


# --- compare ------------------------------------------------------------------

SUMMARY_FIELDS = ("method", "value", "value_decimal", "minimizer", "gap_to_cegio", "steps")


def _series(points, dim: int) -> str:
    fields = ["iteration", *(f"x{i}" for i in range(dim)), "f"]
    rows = [{"iteration": it, **{f"x{i}": repr(float(c)) for i, c in enumerate(x)}, "f": repr(float(v))}
            for it, x, v in points]
    return _csv(rows, fields)


def cmd_compare(args) -> int:
    f, box, text, info, spec = _problem(args)
    backend = _backend(args)
    try:
        out = _outdir(args.out)
    except OSError as exc:
        print(f"cegio: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    init = _init(args.init) or box.center
    if not box.contains(init):
        raise UsageError("--init lies outside the box")
    params = BaselineParams(
        budget=args.budget, seed=args.seed if args.seed is not None else 0,
        temperature=args.temperature, cooling=args.cooling, neighborhood=args.neighborhood,
        step=args.step, contraction=args.contraction, min_step=args.min_step,
    )
    res = cegio_g(f, box, args.eta, backend, init=init)
    ceg_series = [(i, x, v) for i, (x, v) in enumerate(res.trajectory())]
    sa_traj: list = []
    sa = simulated_annealing(f, box, params, init, trajectory=sa_traj)
    ps_traj: list = []
    ps = pattern_search(f, box, params, init, trajectory=ps_traj)

    def summary(method, cand, steps):
        r = rational(cand.value)
        return {"method": method, "value": r["exact"], "value_decimal": r["decimal"],
                "minimizer": " ".join(rational(c)["decimal"] for c in cand.x),
                "gap_to_cegio": rational(cand.value - res.value)["decimal"], "steps": steps}

    rows = [summary("cegio", res.candidate, len(ceg_series) - 1),
            summary("simulated_annealing", sa, len(sa_traj) - 1),
            summary("pattern_search", ps, len(ps_traj) - 1)]
    _write(out / "cegio.csv", _series(ceg_series, box.dim))
    _write(out / "simulated_annealing.csv", _series(sa_traj, box.dim))
    _write(out / "pattern_search.csv", _series(ps_traj, box.dim))
    csv_text = _csv(rows, SUMMARY_FIELDS)
    summary_json = json.dumps({"benchmark": info, "expr": text, "eta": args.eta,
                               "init": [rational(Fraction(c)) for c in init], "rows": rows},
                              sort_keys=True, indent=2) + "\n"
    _write(out / "summary.csv", csv_text)
    _write(out / "summary.json", summary_json)
    sys.stdout.write(csv_text if args.format == "csv" else summary_json)
    return EXIT_OK if res.ok else EXIT_FAIL


# --- list -------------------------------------------------------------------

def cmd_list(args) -> int:
    tags: set[str] = set()
    for chunk in args.filter or []:
        tags.update(t.strip() for t in chunk.split(",") if t.strip())
    for s in list_benchmarks(tags, _catalog(args)):
        print(f"{s.id if s.id is not None else '-':>3}  {s.key:<20} {str(s.box):<24} "
              f"min {float(s.minimum):<12.8g} {','.join(sorted(s.tags))}")
    return EXIT_OK


# --- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cegio", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one optimization and print its record")
    _add_problem(p)
    _add_solver(p)
    p.add_argument("--init", help="initial point, comma-separated (snapped to the finest grid)")
    _add_output(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="run a benchmark sweep")
    p.add_argument("--filter", action="append", help="required tags, comma-separated (repeatable)")
    p.add_argument("--ids", help="restrict to these benchmark ids, comma-separated")
    p.add_argument("--catalog", help="benchmark catalog file to use instead of the bundled one")
    _add_solver(p, algos="g,s,f,auto (comma list allowed)")
    p.add_argument("--repeat", type=int, default=1, help="repetitions per row (default 1)")
    p.add_argument("--jobs", type=int, default=1, help="parallel rows (default 1)")
    _add_output(p, fmt="csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("compare", help="CEGIO against local-search baselines, with trajectories")
    _add_problem(p)
    p.add_argument("--eta", type=int, default=2)
    p.add_argument("--backend", default="enum")
    p.add_argument("--solvers-config")
    p.add_argument("--timeout", type=float)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--init", help="common initial point (default: box center)")
    p.add_argument("--seed", type=int, help="simulated annealing seed (default 0)")
    p.add_argument("--budget", type=int, default=1000, help="baseline evaluation budget")
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--cooling", type=float, default=0.99)
    p.add_argument("--neighborhood", type=float, default=0.1)
    p.add_argument("--step", type=float, default=1.0, help="pattern search initial step")
    p.add_argument("--contraction", type=float, default=0.5)
    p.add_argument("--min-step", type=float, default=1e-6)
    p.add_argument("--out", default="compare_out", help="directory for CSV files (default compare_out)")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("list", help="list registered benchmarks")
    p.add_argument("--filter", action="append")
    p.add_argument("--catalog")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ExprSyntaxError, GridError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"cegio: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BackendError, CapExceededError, EncodingError, OSError) as exc:
        print(f"cegio: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except LowerBoundViolation as exc:
        print(f"cegio: lower bound violated: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
