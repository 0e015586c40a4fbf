"""Command-line entry point: ``corrgap <command> [options]``.

Exit codes: 0 success, 1 a check failed, 2 usage or parse error, 3 instance too large.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import bounds, coverage, gap, verify
from .errors import CapacityError, InputError
from .matroids import WeightedRank, from_dict

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3


def _sig(v: float) -> str:
    return f"{v:.10g}"


def _load_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _rows_to_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_sig(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _render(record: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(record, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        return _rows_to_csv(list(record), [list(record.values())])
    return "".join(f"{k}: {_sig(v) if isinstance(v, float) else v}\n" for k, v in record.items())


def cmd_bound(args) -> int:
    lower = bounds.bound_monster(args.rank, args.girth)
    up = bounds.upper_bound_union(args.rank, args.girth)
    record = {
        "rank": args.rank,
        "girth": args.girth,
        "lower_bound": lower,
        "upper_bound_uniform_padding": bounds.upper_bound_girth_uniform(args.rank, args.girth),
        "upper_bound_union": up.ell_form,
        "upper_bound_union_gamma_form": up.gamma_form,
    }
    _emit(_render(record, args.format), args.out)
    return EXIT_OK


def _table_rows(rho_max: int, gamma_max: int | None):
    return verify.bound_grid(rho_max, gamma_max)


def cmd_bound_table(args) -> int:
    rows = _table_rows(args.rho_max, args.gamma_max)
    if args.format == "json":
        text = json.dumps([{"rho": r, "gamma": g, "bound": b} for r, g, b in rows], indent=2) + "\n"
    elif args.format == "csv":
        text = _rows_to_csv(["rho", "gamma", "bound"], rows)
    else:
        text = "".join(f"{r:4d} {g:4d} {_sig(b)}\n" for r, g, b in rows)
    _emit(text, args.out)
    return EXIT_OK


def cmd_figure1(args) -> int:
    rows = _table_rows(args.rho_max, args.gamma_max)
    _emit(_rows_to_csv(["rho", "gamma", "bound"], rows), args.out)
    return EXIT_OK


def cmd_gap(args) -> int:
    m = from_dict(_load_json(args.matroid))
    weights = None
    if args.weights:
        raw = _load_json(args.weights)
        weights = raw.get("weights") if isinstance(raw, dict) else raw
        if not isinstance(weights, list):
            raise InputError(f"{args.weights}: expected {{\"weights\": [...]}} or a JSON list")
    est = gap.gap_search(WeightedRank(m, weights), restarts=args.restarts, seed=args.seed)
    record = est.to_dict()
    if args.format == "json":
        text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    else:
        record["x_star"] = " ".join(_sig(v) for v in record["x_star"])
        text = _render(record, args.format)
    _emit(text, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = verify.run_suite(args.suite, seed=args.seed, samples=args.samples)
    if args.format == "json":
        text = json.dumps([{"id": c.id, "passed": c.passed, "detail": c.detail} for c in checks], indent=2) + "\n"
    else:
        text = "".join(c.line() + "\n" for c in checks)
    _emit(text, args.out)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def cmd_maximize(args) -> int:
    inst = coverage.instance_from_dict(_load_json(args.instance))
    fw = coverage.frank_wolfe(inst, iters=args.iters)
    chosen = coverage.round_solution(inst, fw.x)
    record = {
        "chosen": sorted(chosen),
        "value": inst.function()(chosen),
        "relaxation_value": fw.value,
        "relaxation_upper_bound": fw.upper_bound,
        "iterations": fw.iterations,
        "alpha": inst.alpha,
        "x": [float(v) for v in fw.x],
    }
    if inst.n <= coverage.CERTIFY_MAX_N:
        opt, _ = coverage.brute_force_opt(inst)
        record["opt"] = opt
        record["ratio"] = record["value"] / opt if opt > 0 else 1.0
    _emit(json.dumps(record, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="corrgap", description="Correlation-gap bounds and desk-scale verifiers for matroid rank functions.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats=("json", "csv", "text"), default="text"):
        sp.add_argument("--format", choices=formats, default=default)
        sp.add_argument("--out", help="write output to this path instead of stdout")
        sp.add_argument("--seed", type=int, default=verify.DEFAULT_SEED)

    b = sub.add_parser("bound", help="lower and upper bounds for one (rank, girth)")
    b.add_argument("--rank", type=int, required=True)
    b.add_argument("--girth", type=int, required=True)
    common(b)
    b.set_defaults(func=cmd_bound)

    t = sub.add_parser("bound-table", help="lower bound over a (rank, girth) grid")
    t.add_argument("--rho-max", type=int, default=30)
    t.add_argument("--gamma-max", type=int)
    common(t, default="csv")
    t.set_defaults(func=cmd_bound_table)

    f = sub.add_parser("figure1", help="CSV of the lower bound for plotting against rank and girth")
    f.add_argument("--rho-max", type=int, default=30)
    f.add_argument("--gamma-max", type=int)
    f.add_argument("--out", help="CSV path (stdout if omitted)")
    f.add_argument("--seed", type=int, default=verify.DEFAULT_SEED)
    f.set_defaults(func=cmd_figure1)

    g = sub.add_parser("gap", help="estimate the correlation gap of a (weighted) matroid rank function")
    g.add_argument("--matroid", required=True, help="matroid JSON file")
    g.add_argument("--weights", help='JSON {"weights": [...]} sidecar (a bare list also works)')
    g.add_argument("--restarts", type=int, default=64)
    common(g, default="json")
    g.set_defaults(func=cmd_gap)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", default="all", help=f"one of {', '.join([*verify.SUITES, 'all'])}")
    v.add_argument("--samples", type=int, help="Monte Carlo traces for the clock suite")
    common(v, formats=("json", "text"))
    v.set_defaults(func=cmd_verify)

    mx = sub.add_parser("maximize", help="maximize a sum of rank/coverage objectives under a matroid")
    mx.add_argument("--instance", required=True, help="instance JSON file")
    mx.add_argument("--iters", type=int, default=2000)
    common(mx, formats=("json",), default="json")
    mx.set_defaults(func=cmd_maximize)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
