"""Command-line front end.

Subcommands:
    encode  quantize a dataset and write an IPQZ container
    eval    per-resolution space/error report over sampled pairs
    filter  threshold candidate pairs from a pairs file
    bounds  print planner output and space bounds for one instance

Exit codes: 0 success, 1 usage, 2 input parsing, 3 numeric domain.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from .codec import code_length, decode_rows, encode_rows, total_bits
from .container import write_container
from .dataio import FORMATS, load, normalize, sample_pairs
from .errors import (
    AllZero,
    BudgetExceeded,
    DimensionMismatch,
    InvalidEpsilon,
    InvalidThresholds,
    IpqzError,
    NonFinite,
    NormTooLarge,
    ParseError,
    SetTooSmall,
    ZeroVector,
)
from .estimator import worst_case_error
from .grid import GridParams, as_delta, quantize_rows, reconstruct_rows
from .numerics import seq_dot
from .planner import plan_distinguish, plan_estimate
from .bounds import space_lb

USAGE_EXIT, PARSE_EXIT, NUMERIC_EXIT = 1, 2, 3

_PARSE_ERRORS = (
    ParseError,
    DimensionMismatch,
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
)
_NUMERIC_ERRORS = (
    NormTooLarge,
    NonFinite,
    BudgetExceeded,
    ZeroVector,
    InvalidThresholds,
    InvalidEpsilon,
    AllZero,
    SetTooSmall,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _infer_format(path: str, explicit: str | None) -> str:
    if explicit and explicit != "auto":
        return explicit
    ext = os.path.splitext(path)[1].lower().lstrip(".")
    if ext in FORMATS:
        return ext
    if "idx" in os.path.basename(path) or path.endswith("-ubyte"):
        return "idx"
    raise UsageError(f"cannot infer format of {path!r}; pass --format")


def _parse_delta_token(tok: str) -> Fraction:
    try:
        return as_delta(tok.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad delta {tok!r}: {exc}")


@dataclass(frozen=True)
class EvalReport:
    """One row of the eval table: space and error for a single delta."""

    dataset: str
    d: int
    delta: Fraction
    space_ratio: float
    median_err: float
    p90_err: float
    max_err: float
    pair_count: int
    seed: int

    @property
    def worst_case(self) -> float:
        return worst_case_error(self.delta)

    def as_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "d": self.d,
            "delta": f"{self.delta.numerator}/{self.delta.denominator}",
            "delta_float": float(self.delta),
            "space_ratio": self.space_ratio,
            "median_err": self.median_err,
            "p90_err": self.p90_err,
            "max_err": self.max_err,
            "worst_case": self.worst_case,
            "pair_count": self.pair_count,
            "seed": self.seed,
        }


def build_parser() -> _Parser:
    top = _Parser(prog="ipqz", description=__doc__)
    top.add_argument("--version", action="version", version=f"ipqz {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="quantize a dataset into an IPQZ container")
    enc.add_argument("--input", required=True)
    enc.add_argument("--format", default="auto", choices=("auto", *FORMATS))
    enc.add_argument("--delta", help="grid resolution as P/Q or decimal")
    enc.add_argument("--epsilon", type=float, help="target additive error (delta = eps/4)")
    enc.add_argument("--alpha", type=float, help="upper threshold (with --beta)")
    enc.add_argument("--beta", type=float, help="lower threshold (with --alpha)")
    enc.add_argument("--output", required=True)
    enc.add_argument("--skip-header", action="store_true")
    enc.add_argument("--json", action="store_true")

    ev = sub.add_parser("eval", help="space and error report over sampled pairs")
    ev.add_argument("--input", required=True)
    ev.add_argument("--format", default="auto", choices=("auto", *FORMATS))
    ev.add_argument("--delta", required=True, help="comma-separated resolutions")
    ev.add_argument("--pairs", type=int, required=True)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--dataset", default=None, help="label for the report")
    ev.add_argument("--report-dir", default=None,
                    help="write eval.csv and PNG figures here")
    ev.add_argument("--skip-header", action="store_true")
    ev.add_argument("--json", action="store_true")

    fl = sub.add_parser("filter", help="eliminate candidate pairs below beta")
    fl.add_argument("--input", required=True)
    fl.add_argument("--format", default="auto", choices=("auto", *FORMATS))
    fl.add_argument("--pairs-file", required=True,
                    help="two decimal indices per line, whitespace-separated")
    fl.add_argument("--alpha", type=float, required=True)
    fl.add_argument("--beta", type=float, required=True)
    fl.add_argument("--skip-header", action="store_true")
    fl.add_argument("--json", action="store_true")

    bd = sub.add_parser("bounds", help="planner output and space bounds")
    bd.add_argument("--alpha", type=float, required=True)
    bd.add_argument("--beta", type=float, required=True)
    bd.add_argument("--d", type=int, required=True)
    bd.add_argument("--json", action="store_true")
    return top


# ---------------------------------------------------------------------------
# encode


def _select_delta(args) -> Fraction:
    selectors = [
        args.delta is not None,
        args.epsilon is not None,
        args.alpha is not None or args.beta is not None,
    ]
    if sum(selectors) != 1:
        raise UsageError("pass exactly one of --delta, --epsilon, or --alpha/--beta")
    if args.delta is not None:
        return _parse_delta_token(args.delta)
    if args.epsilon is not None:
        return plan_estimate(args.epsilon).delta
    if args.alpha is None or args.beta is None:
        raise UsageError("--alpha and --beta must be given together")
    return plan_distinguish(args.alpha, args.beta).delta


def cmd_encode(args) -> int:
    delta = _select_delta(args)
    fmt = _infer_format(args.input, args.format)
    raw = load(args.input, fmt, skip_header=args.skip_header)
    vs = normalize(raw, source=args.input)
    grid = GridParams(vs.d, delta)
    codes = encode_rows(quantize_rows(vs.vectors, grid), grid)
    write_container(codes, grid, args.output, norms=vs.norms)
    ell = total_bits(grid)
    info = {
        "output": args.output,
        "count": len(codes),
        "dropped_zero_vectors": vs.dropped,
        "d": grid.d,
        "delta": f"{grid.delta.numerator}/{grid.delta.denominator}",
        "bits_per_vector": ell,
        "s": grid.s,
        "space_ratio": ell / (32.0 * grid.d),
    }
    if args.json:
        print(json.dumps(info, sort_keys=True))
    else:
        print(f"wrote {info['count']} codes to {args.output}")
        print(f"d={info['d']} delta={info['delta']} s={info['s']}")
        print(f"l={ell} bits/vector, space ratio {info['space_ratio']:.4f} vs 32-bit floats")
        if vs.dropped:
            print(f"dropped {vs.dropped} zero vectors")
    return 0


# ---------------------------------------------------------------------------
# eval


def _evaluate_delta(vs, delta: Fraction, pairs: np.ndarray, dataset: str,
                    seed: int) -> tuple[EvalReport, np.ndarray]:
    grid = GridParams(vs.d, delta)
    z = quantize_rows(vs.vectors, grid)
    decoded = decode_rows(encode_rows(z, grid), grid)
    recon = reconstruct_rows(decoded, grid)
    i, j = pairs[:, 0], pairs[:, 1]
    est = np.atleast_1d(seq_dot(recon[i], recon[j]))
    true = np.atleast_1d(seq_dot(vs.vectors[i], vs.vectors[j]))
    err = np.abs(est - true)
    report = EvalReport(
        dataset=dataset,
        d=vs.d,
        delta=delta,
        space_ratio=total_bits(grid) / (32.0 * vs.d),
        median_err=float(np.median(err)),
        p90_err=float(np.quantile(err, 0.9)),
        max_err=float(err.max()),
        pair_count=len(pairs),
        seed=seed,
    )
    return report, err


def _write_eval_csv(reports, path: str) -> None:
    cols = ["dataset", "d", "delta", "delta_float", "space_ratio",
            "median_err", "p90_err", "max_err", "worst_case", "pair_count", "seed"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for r in reports:
            row = r.as_dict()
            fh.write(",".join(str(row[c]) for c in cols) + "\n")


def cmd_eval(args) -> int:
    if args.pairs < 1:
        raise UsageError(f"--pairs must be at least 1, got {args.pairs}")
    deltas = [_parse_delta_token(tok) for tok in args.delta.split(",") if tok.strip()]
    if not deltas:
        raise UsageError("--delta list is empty")
    fmt = _infer_format(args.input, args.format)
    raw = load(args.input, fmt, skip_header=args.skip_header)
    vs = normalize(raw, source=args.input)
    dataset = args.dataset or os.path.basename(args.input)
    pairs = sample_pairs(vs, args.pairs, args.seed)
    reports = []
    errors_by_delta = {}
    for delta in deltas:
        rep, err = _evaluate_delta(vs, delta, pairs, dataset, args.seed)
        reports.append(rep)
        errors_by_delta[delta] = err
    if args.json:
        print(json.dumps([r.as_dict() for r in reports], sort_keys=True))
    else:
        hdr = (f"{'dataset':<14}{'d':>6}{'delta':>10}{'space':>8}"
               f"{'median':>10}{'90th':>10}{'max':>10}")
        print(hdr)
        for r in reports:
            print(
                f"{r.dataset[:13]:<14}{r.d:>6}{float(r.delta):>10.4g}"
                f"{r.space_ratio:>8.1%}{r.median_err:>10.2g}"
                f"{r.p90_err:>10.2g}{r.max_err:>10.2g}"
            )
    if args.report_dir:
        from .plots import render_report_figures

        os.makedirs(args.report_dir, exist_ok=True)
        csv_path = os.path.join(args.report_dir, "eval.csv")
        _write_eval_csv(reports, csv_path)
        paths = render_report_figures(reports, errors_by_delta, args.report_dir)
        if not args.json:
            print(f"report written to {csv_path}")
            for p in paths:
                print(f"figure written to {p}")
    return 0


# ---------------------------------------------------------------------------
# filter


def _read_pairs_file(path: str, n: int) -> np.ndarray:
    pairs = []
    offset = 0
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh):
            line = raw.decode("utf-8", errors="replace").strip()
            if line:
                parts = line.split()
                if len(parts) != 2:
                    raise ParseError(
                        f"pairs line {lineno} needs two indices", offset=offset
                    )
                try:
                    i, j = int(parts[0]), int(parts[1])
                except ValueError:
                    raise ParseError(
                        f"pairs line {lineno} is not numeric", offset=offset
                    )
                if not (0 <= i < n and 0 <= j < n):
                    raise ParseError(
                        f"pairs line {lineno}: index out of range [0, {n})",
                        offset=offset,
                    )
                pairs.append((i, j))
            offset += len(raw)
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)


def cmd_filter(args) -> int:
    spec = plan_distinguish(args.alpha, args.beta)
    fmt = _infer_format(args.input, args.format)
    raw = load(args.input, fmt, skip_header=args.skip_header)
    vs = normalize(raw, source=args.input)
    pairs = _read_pairs_file(args.pairs_file, len(vs))
    grid = GridParams(vs.d, spec.delta)
    z = quantize_rows(vs.vectors, grid)
    decoded = decode_rows(encode_rows(z, grid), grid)
    recon = reconstruct_rows(decoded, grid)
    if len(pairs):
        est = np.atleast_1d(seq_dot(recon[pairs[:, 0]], recon[pairs[:, 1]]))
    else:
        est = np.zeros(0)
    survives = est >= spec.t
    order = sorted(
        (k for k in range(len(pairs)) if survives[k]),
        key=lambda k: (-est[k], int(pairs[k, 0]), int(pairs[k, 1])),
    )
    out = {
        "alpha": args.alpha,
        "beta": args.beta,
        "delta": f"{spec.delta.numerator}/{spec.delta.denominator}",
        "threshold": spec.t,
        "pair_count": int(len(pairs)),
        "survived": int(survives.sum()),
        "eliminated": int(len(pairs) - survives.sum()),
        "survivors": [
            {"i": int(pairs[k, 0]), "j": int(pairs[k, 1]), "estimate": float(est[k])}
            for k in order
        ],
    }
    if args.json:
        print(json.dumps(out, sort_keys=True))
    else:
        print(f"threshold t={spec.t:.6f} (delta {out['delta']})")
        print(f"{out['survived']} survived, {out['eliminated']} eliminated")
        for row in out["survivors"]:
            print(f"{row['i']:>8} {row['j']:>8}  {row['estimate']:+.6f}")
    return 0


# ---------------------------------------------------------------------------
# bounds


def cmd_bounds(args) -> int:
    spec = plan_distinguish(args.alpha, args.beta)
    grid = GridParams(args.d, spec.delta)
    ell = code_length(args.d, spec.delta)
    lb = space_lb(args.alpha, args.beta, args.d)
    upper_asym = args.d * math.log2(math.sqrt(1.0 - args.beta) / (args.alpha - args.beta))
    out = {
        "alpha": args.alpha,
        "beta": args.beta,
        "d": args.d,
        "delta": f"{spec.delta.numerator}/{spec.delta.denominator}",
        "delta_float": float(spec.delta),
        "t": spec.t,
        "s": grid.s,
        "bits": ell,
        "bits_asymptotic": upper_asym,
        "lower_bound_bits": lb.bits,
        "lower_bound_asymptotic": lb.asymptotic_bits,
        "gap_per_dimension": (ell - lb.bits) / args.d,
    }
    if args.json:
        print(json.dumps(out, sort_keys=True))
    else:
        print(f"alpha={args.alpha} beta={args.beta} d={args.d}")
        print(f"delta = {out['delta']} ({out['delta_float']:.8g})")
        print(f"t     = {spec.t:.8g}")
        print(f"s     = {grid.s}")
        print(f"upper: l = {ell} bits "
              f"(asymptotic d log2(sqrt(1-b)/(a-b)) = {upper_asym:.1f})")
        print(f"lower: {lb.bits:.1f} bits (same asymptotic form = "
              f"{lb.asymptotic_bits:.1f})")
        print(f"gap per dimension: {out['gap_per_dimension']:.2f} bits")
    return 0


_COMMANDS = {
    "encode": cmd_encode,
    "eval": cmd_eval,
    "filter": cmd_filter,
    "bounds": cmd_bounds,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except _PARSE_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return PARSE_EXIT
    except _NUMERIC_ERRORS as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return NUMERIC_EXIT
    except IpqzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PARSE_EXIT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
