"""Command-line front-end: analyze, generate, verify.

Exit codes: 0 verdict produced / suite passed; 1 I/O or parse error;
2 premise violated or configuration rejected; 3 verification suite failed.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .config import DEFAULTS, CapacityError, PremiseViolated
from .extract_l0 import analyze_l0, square_census
from .extract_l2 import analyze_l2
from .extract_linf import analyze_linf
from .generators import NoiseModel, apply_noise, gen_dictator, gen_disjoint_family, gen_tightness
from .linear import LinearFunction, ValueTable, value_table
from .reports import family_sum_function
from .verify import run_suite

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="snfkn",
        description="Structure recovery for nearly linear Boolean functions on S_n",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="analyze an instance file")
    pa.add_argument("--metric", choices=("l2", "l0", "linf"), required=True)
    pa.add_argument("--input", required=True, help="instance JSON path")
    pa.add_argument("--out", help="report JSON path (default: stdout only)")
    pa.add_argument("--seed", type=int, default=0)
    pa.add_argument("--samples", type=int, default=DEFAULTS.samples)
    pa.add_argument("--exact-threshold", type=int, default=DEFAULTS.exact_threshold)
    pa.add_argument("--delta", type=float, help="dictator-mode threshold parameter")
    pa.add_argument("--epsilon", type=float, help="sup-norm bound (linf metric)")
    pa.add_argument("--tau", type=float, default=DEFAULTS.tau)
    pa.add_argument("--heavy-k", type=float, default=DEFAULTS.heavy_k)
    pa.add_argument("--eps0", type=float, default=DEFAULTS.eps0)
    pa.add_argument("--line-threshold", type=int, default=DEFAULTS.line_threshold)
    pa.add_argument("--support-cap", type=int, default=DEFAULTS.support_cap_factor)
    pa.add_argument("--census", action="store_true", help="include a square census (l0)")

    pg = sub.add_parser("generate", help="generate an instance file")
    pg.add_argument("kind", choices=("dictator", "family", "tightness"))
    pg.add_argument("--n", type=int, required=True)
    pg.add_argument("--out", required=True)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--orientation", choices=("row", "col"), default="row")
    pg.add_argument("--index", type=int, default=1, help="1-based line index")
    pg.add_argument("--targets", help="comma-separated 1-based targets, e.g. 1,2")
    pg.add_argument("--m", type=int, help="family size")
    pg.add_argument("--mode", choices=("uniform", "heavy-line"), default="uniform")
    pg.add_argument("--k-off", type=int, default=0)
    pg.add_argument("--delta", type=float)
    pg.add_argument("--epsilon", type=float, default=0.0)
    pg.add_argument("--noise", choices=("uniform", "gaussian", "corrupt_k", "flip_outputs"))
    pg.add_argument("--amplitude", type=float, default=0.0)
    pg.add_argument("--sigma", type=float, default=0.0)
    pg.add_argument("--k", type=int, default=0)
    pg.add_argument("--magnitude", type=float, default=0.0)
    pg.add_argument("--prob", type=float, default=0.0)
    pg.add_argument("--table", action="store_true", help="emit a value table instead")

    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("suite_pos", nargs="?", default=None, metavar="suite")
    pv.add_argument("--suite", default=None)
    pv.add_argument("--out", required=True, help="CSV output path")
    pv.add_argument("--trials", type=int, default=0)
    pv.add_argument("--n", type=int, default=0)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--samples", type=int, default=0)
    pv.add_argument("--no-plot", action="store_true", help="skip the PNG next to the CSV")
    return p


def _load_instance(path: str):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise _CliIOError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _CliIOError(
            f"malformed JSON in {path}: {exc.msg} at line {exc.lineno} column {exc.colno}"
        ) from exc
    try:
        if "values" in data:
            return ValueTable.from_json_dict(data)
        return LinearFunction.from_json_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise _CliIOError(f"bad instance in {path}: {exc}") from exc


class _CliIOError(Exception):
    pass


def _cmd_analyze(args) -> int:
    if args.samples < 10**3:
        print("config rejected: --samples must be at least 10^3", file=sys.stderr)
        return 2
    opts = DEFAULTS.with_(
        seed=args.seed,
        samples=args.samples,
        exact_threshold=args.exact_threshold,
        tau=args.tau,
        dictator_delta=args.delta,
        heavy_k=args.heavy_k,
        eps0=args.eps0,
        line_threshold=args.line_threshold,
        support_cap_factor=args.support_cap,
    )
    instance = _load_instance(args.input)
    if args.metric == "l2":
        report = analyze_l2(instance, opts)
    elif args.metric == "l0":
        if not isinstance(instance, LinearFunction):
            print("config rejected: the l0 metric takes linear input", file=sys.stderr)
            return 2
        report = analyze_l0(instance, opts)
        if args.census:
            census = square_census(instance, opts.tau, seed=args.seed)
            report.diagnostics["census"] = census.csv_row()
    else:
        if args.epsilon is None:
            print("config rejected: --epsilon is required for linf", file=sys.stderr)
            return 2
        if not isinstance(instance, LinearFunction):
            print("config rejected: the linf metric takes linear input", file=sys.stderr)
            return 2
        report = analyze_linf(instance, args.epsilon, opts)

    text = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    m = report.metrics
    print(
        f"verdict={report.verdict} n={report.n} cells={len(report.cells)} "
        f"flipped={report.flipped} epsilon={m['epsilon']:.6g} "
        f"closeness={m['closeness']:.6g} regime={m['regime']}",
        file=sys.stderr,
    )
    return 0


def _parse_targets(raw: str, n: int):
    try:
        vals = [int(v) for v in raw.split(",") if v.strip()]
    except ValueError as exc:
        raise _CliIOError(f"bad --targets: {exc}") from exc
    return [v - 1 for v in vals]


def _cmd_generate(args) -> int:
    if args.kind == "dictator":
        if not args.targets:
            print("config rejected: dictator needs --targets", file=sys.stderr)
            return 2
        obj = gen_dictator(
            args.n, args.orientation, args.index - 1, _parse_targets(args.targets, args.n)
        )
    elif args.kind == "family":
        if args.m is None:
            print("config rejected: family needs --m", file=sys.stderr)
            return 2
        family = gen_disjoint_family(args.n, args.m, args.mode, args.k_off, args.seed)
        obj = family_sum_function(family)
    else:
        if args.delta is None:
            print("config rejected: tightness needs --delta", file=sys.stderr)
            return 2
        obj = gen_tightness(args.n, args.delta, args.epsilon)

    if args.noise:
        model = NoiseModel(
            args.noise,
            amplitude=args.amplitude,
            sigma=args.sigma,
            k=args.k,
            magnitude=args.magnitude,
            prob=args.prob,
            seed=args.seed,
        )
        if args.noise == "flip_outputs":
            obj = apply_noise(value_table(obj), model)
        else:
            obj = apply_noise(obj, model)
    if args.table and isinstance(obj, LinearFunction):
        obj = value_table(obj)

    payload = obj.to_json_dict()
    with open(args.out, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"wrote {args.kind} instance (n={args.n}) to {args.out}")
    return 0


def _cmd_verify(args) -> int:
    suite = args.suite or args.suite_pos
    if suite is None or (args.suite and args.suite_pos and args.suite != args.suite_pos):
        print("config rejected: name exactly one suite (positional or --suite)", file=sys.stderr)
        return 2
    result = run_suite(suite, trials=args.trials, n=args.n, seed=args.seed, samples=args.samples)
    lines = result.csv_lines()
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    if not args.no_plot:
        from .plots import render_suite_png

        png = args.out[:-4] + ".png" if args.out.endswith(".csv") else args.out + ".png"
        render_suite_png(result, png)
    status = "pass" if result.passed else "FAIL"
    summary = {"trials": len(result.rows), **result.summary}
    pairs = " ".join(f"{k}={v}" for k, v in sorted(summary.items()))
    print(f"suite={result.suite} {pairs} -> {status}")
    return 0 if result.passed else 3


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    np.seterr(all="raise", under="ignore")
    try:
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "generate":
            return _cmd_generate(args)
        return _cmd_verify(args)
    except _CliIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PremiseViolated as exc:
        detail = json.dumps(exc.diagnostics, sort_keys=True, default=str)
        print(f"premise violated: {exc} {detail}", file=sys.stderr)
        return 2
    except (ValueError, CapacityError) as exc:
        print(f"config rejected: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
