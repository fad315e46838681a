"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 an acceptance criterion failed
(``check`` only).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from gausskuzmin import __version__, acceptance, cfrac_core, constants
from gausskuzmin.errors import DomainError
from gausskuzmin.gk_iteration import IterationConfig, IterationReport, estimate_rate, run_iteration
from gausskuzmin.grid import GridFunction, nodes
from gausskuzmin.mc_verify import MCConfig, empirical_cdf_distance
from gausskuzmin.pf_operator import (
    DEFAULT_GRID,
    DEFAULT_TRUNCATION,
    OperatorConfig,
    check_monotone_flip,
    normalization_error,
    random_nondecreasing_pl,
)

CSV_COLUMNS = ("n", "sup_error", "ratio_error", "M_n", "ratio_M")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --------------------------------------------------------------------------
# output helpers

def json_ready(obj: Any) -> Any:
    """Round floats to 15 significant digits; non-finite floats become None."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(f"{obj:.15g}")
    if isinstance(obj, (np.floating,)):
        return json_ready(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(json_ready(obj), allow_nan=False, ensure_ascii=False)


def csv_field(v: Optional[float]) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return ""
    if isinstance(v, int):
        return str(v)
    return f"{v:.12g}"


def reports_to_csv(reports: Sequence[IterationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([csv_field(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def reports_from_csv(text: str) -> list[IterationReport]:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or "n" not in rows[0] or "sup_error" not in rows[0]:
        raise DomainError("CSV must have at least the columns n and sup_error")

    def num(s: Optional[str]) -> Optional[float]:
        return float(s) if s not in (None, "") else None

    return [
        IterationReport(n=int(r["n"]), **{c: num(r.get(c)) for c in CSV_COLUMNS[1:]})
        for r in rows
    ]


def manifest(subcommand: str, config: dict, started: float) -> dict:
    return {
        "subcommand": subcommand,
        "config": config,
        "version": __version__,
        "duration_s": time.perf_counter() - started,
    }


def _emit(text: str, path: Optional[str], man: Optional[dict] = None) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    p = Path(path)
    p.write_text(text, encoding="utf-8", newline="")
    if man is not None:
        Path(str(p) + ".manifest.json").write_text(dumps(man) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# subcommands

def cmd_constants(args, started) -> int:
    q = constants.contraction_constant(1e-12)
    out = {
        "zeta2": constants.zeta(2, 1e-13).value,
        "zeta3": constants.zeta(3, 1e-13).value,
        "q": q.value,
        "log2": constants.LOG2,
        "q_printed": constants.PRINTED_Q,
        "q_note": constants.PRINTED_Q_NOTE,
    }
    out["manifest"] = manifest("constants", {}, started)
    _emit(dumps(out), None)
    return 0


def cmd_expand(args, started) -> int:
    e = cfrac_core.expand(args.x, max_digits=args.digits)
    out = {"digits": list(e.digits), "exact": e.exact}
    out["manifest"] = manifest("expand", {"x": args.x, "digits": args.digits}, started)
    _emit(dumps(out), None)
    return 0


def _operator_config(args) -> OperatorConfig:
    return OperatorConfig(truncation_index=args.trunc, grid_size=args.grid)


def cmd_operator_check(args, started) -> int:
    cfg = _operator_config(args)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    failures = 0
    for _ in range(args.trials):
        f = cfg.grid_function(random_nondecreasing_pl(rng, cfg.grid_size))
        rep = check_monotone_flip(f, cfg, slack=args.slack)
        worst = max(worst, rep.worst_violation)
        failures += not rep.is_output_nonincreasing
    out = {
        "trials": args.trials,
        "nonincreasing_outputs": args.trials - failures,
        "worst_violation": worst,
        "normalization_error": normalization_error(cfg),
        "status": "ok" if failures == 0 else "monotonicity violated",
    }
    out["manifest"] = manifest(
        "operator-check",
        {"trials": args.trials, "seed": args.seed, "grid": args.grid, "trunc": args.trunc, "slack": args.slack},
        started,
    )
    _emit(dumps(out), None)
    return 0


def _read_seed_csv(path: str, grid: int, interpolation) -> GridFunction:
    try:
        rows = [r for r in csv.reader(Path(path).read_text(encoding="utf-8").splitlines()) if r]
    except OSError as exc:
        raise DomainError(f"cannot read seed file {path}: {exc}") from exc
    try:
        float(rows[0][-1])
    except (ValueError, IndexError):
        rows = rows[1:]  # header
    data = np.array([[float(c) for c in r] for r in rows])
    if data.ndim != 2 or data.shape[0] < 2:
        raise DomainError("seed CSV needs one column (node values) or two columns (x, F)")
    if data.shape[1] == 1:
        if data.shape[0] != grid:
            raise DomainError(f"single-column seed CSV must have {grid} rows, got {data.shape[0]}")
        values = data[:, 0]
    else:
        values = np.interp(nodes(grid), data[:, 0], data[:, 1])
    return GridFunction(values, interpolation)


def cmd_iterate(args, started) -> int:
    op = _operator_config(args)
    seed_fn = args.seed_fn
    if seed_fn.startswith("csv:"):
        initial: Any = _read_seed_csv(seed_fn[4:], op.grid_size, op.interpolation)
    elif seed_fn in ("identity", "gauss"):
        initial = seed_fn
    else:
        raise DomainError(f"--seed-fn must be identity, gauss or csv:<path>, got {seed_fn!r}")
    reports = run_iteration(IterationConfig(operator=op, steps=args.n, initial=initial))
    config = {"n": args.n, "grid": args.grid, "trunc": args.trunc, "seed_fn": seed_fn, "out": args.out}
    if args.out == "csv":
        man = manifest("iterate", config, started)
        _emit(reports_to_csv(reports), args.path, man)
    else:
        out = {"rows": [asdict(r) for r in reports], "manifest": manifest("iterate", config, started)}
        _emit(dumps(out) + "\n", args.path)
    return 0


def cmd_rate(args, started) -> int:
    try:
        text = Path(args.infile).read_text(encoding="utf-8")
    except OSError as exc:
        raise DomainError(f"cannot read {args.infile}: {exc}") from exc
    est = estimate_rate(reports_from_csv(text), args.lo, args.hi)
    out = asdict(est)
    out["manifest"] = manifest("rate", {"in": args.infile, "from": args.lo, "to": args.hi}, started)
    _emit(dumps(out), None)
    return 0


def cmd_mc(args, started) -> int:
    prec = args.prec if args.prec == "auto" else _int(args.prec, "--prec")
    cfg = MCConfig(n=args.n, samples=args.samples, seed=args.seed, precision_bits=prec)
    rep = empirical_cdf_distance(cfg, workers=args.workers)
    out = rep.to_dict()
    out["manifest"] = manifest(
        "mc", {"n": args.n, "samples": args.samples, "seed": args.seed, "prec": args.prec, "bits": cfg.bits}, started
    )
    _emit(dumps(out), args.path)
    return 0


def cmd_check(args, started) -> int:
    only = [args.only] if args.only else None
    if only and only[0] not in acceptance.CRITERIA:
        raise DomainError(f"unknown criterion {args.only!r}; choose from {', '.join(acceptance.CRITERIA)}")
    results = []
    for name in only or list(acceptance.CRITERIA):
        res = acceptance.run_criterion(name, threshold=args.contraction_threshold, workers=args.workers)
        print(res.line(), flush=True)
        results.append(res)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return 0 if passed == len(results) else 2


def _int(s: str, flag: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise DomainError(f"{flag} expects an integer, got {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gausskuzmin", description="Gauss-Kuzmin numerical laboratory")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("constants", help="zeta(2), zeta(3), q = 2 zeta(3) - zeta(2), log 2")

    e = sub.add_parser("expand", help="continued-fraction digits of a rational in [0, 1)")
    e.add_argument("x", help="p/q or a decimal literal")
    e.add_argument("--digits", type=int, default=cfrac_core.DEFAULT_MAX_DIGITS)

    def grid_flags(sp):
        sp.add_argument("--grid", type=int, default=DEFAULT_GRID)
        sp.add_argument("--trunc", type=int, default=DEFAULT_TRUNCATION)

    o = sub.add_parser("operator-check", help="monotonicity-flip trials and normalization of U")
    o.add_argument("--trials", type=int, default=200)
    o.add_argument("--seed", type=int, default=42)
    o.add_argument("--slack", type=float, default=1e-9)
    grid_flags(o)

    it = sub.add_parser("iterate", help="run the Gauss-Kuzmin recursion and the g-pipeline")
    it.add_argument("--n", type=int, default=20)
    it.add_argument("--seed-fn", default="identity", help="identity | gauss | csv:<path>")
    it.add_argument("--out", choices=("csv", "json"), default="csv")
    it.add_argument("--path", default=None, help="write here instead of stdout (plus a .manifest.json sidecar)")
    grid_flags(it)

    r = sub.add_parser("rate", help="fit the geometric decay rate from an iterate CSV")
    r.add_argument("--in", dest="infile", required=True)
    r.add_argument("--from", dest="lo", type=int, default=8)
    r.add_argument("--to", dest="hi", type=int, default=16)

    m = sub.add_parser("mc", help="Monte Carlo check of the Gauss limit law")
    m.add_argument("--n", type=int, default=10)
    m.add_argument("--samples", type=int, default=100_000)
    m.add_argument("--seed", type=int, default=42)
    m.add_argument("--prec", default="auto", help="auto (= 4n + 64) or a bit count >= 64")
    m.add_argument("--out", choices=("json",), default="json")
    m.add_argument("--path", default=None)
    m.add_argument("--workers", type=int, default=1)

    c = sub.add_parser("check", help="run the acceptance criteria")
    c.add_argument("--only", default=None, help=f"one of: {', '.join(acceptance.CRITERIA)}")
    c.add_argument(
        "--contraction-threshold", type=float, default=acceptance.DEFAULT_CONTRACTION_THRESHOLD,
        help="bound on M_{n+1}/M_n and on the error ratios",
    )
    c.add_argument("--workers", type=int, default=1)
    return p


COMMANDS = {
    "constants": cmd_constants,
    "expand": cmd_expand,
    "operator-check": cmd_operator_check,
    "iterate": cmd_iterate,
    "rate": cmd_rate,
    "mc": cmd_mc,
    "check": cmd_check,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    started = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, started)
    except (UsageError, DomainError, ValueError, OSError) as exc:
        print(f"gausskuzmin: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
