"""Command-line entry point: ``verify``, ``optimize``, ``sweep`` and ``chains``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

from . import optimizer, verify
from .chains import MAX_TARGET, enumerate_star_chains, minimal_length

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

CSV_COLUMNS = ("N", "s_target", "method", "chain", "nu", "single_pass_prob", "plan_json")
DEGENERATE_TARGET = "target s must lie strictly between 0 and 1 (s = 0 and s = 1 are degenerate targets, excluded from optimization)"

log = logging.getLogger("ghzprimate")


class UsageError(Exception):
    pass


def parse_int_range(text: str) -> list[int]:
    """``"2..5"`` -> [2, 3, 4, 5]; a bare integer is a one-point range."""
    try:
        if ".." in text:
            lo, hi = (int(v) for v in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or a..b range, got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def parse_s_grid(text: str) -> list[float]:
    """``"0.1:0.9:0.1"`` -> 0.1, 0.2, ..., 0.9 (stop included); a bare number is one point."""
    try:
        parts = [float(v) for v in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step or a number, got {text!r}") from None
    if len(parts) == 1:
        return parts
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    start, stop, step = parts
    if step <= 0.0 or stop < start:
        raise argparse.ArgumentTypeError(f"empty or backwards grid {text!r}")
    count = math.floor((stop - start) / step + 1e-9) + 1
    return [round(start + k * step, 12) for k in range(count)]


def _config(args) -> optimizer.OptimizerConfig:
    try:
        return optimizer.OptimizerConfig(
            restarts=args.restarts,
            seed=args.seed,
            max_evals=args.max_evals,
            fixed_primates=args.fixed_primates,
            chain_slack=args.chain_slack,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _check_target(s: float) -> None:
    if not 0.0 < s < 1.0:
        raise UsageError(f"{DEGENERATE_TARGET}; got {s}")


def _check_qubits(n: int) -> None:
    if not 2 <= n <= MAX_TARGET:
        raise UsageError(f"qubit count must lie in 2..{MAX_TARGET}, got {n}")


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _run_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def cmd_verify(args) -> int:
    try:
        results = verify.run_all(args.max_n, args.trials, args.tol, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    passed = all(r.passed for r in results)
    report = {
        "schema_version": optimizer.SCHEMA_VERSION,
        "passed": passed,
        "run_config": _run_config(args),
        "batteries": [r.to_json() for r in results],
    }
    for r in results:
        log.info("%-18s %s  trials=%d  max_error=%.3g", r.name, "PASS" if r.passed else "FAIL", r.trials, r.max_error)
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_OK if passed else EXIT_FAILURE


def cmd_optimize(args) -> int:
    _check_target(args.target_s)
    _check_qubits(args.qubits)
    config = _config(args)
    try:
        report = optimizer.optimize_plan(args.qubits, args.target_s, args.method, config)
    except optimizer.InfeasibleTarget as exc:
        log.error("%s", exc)
        return EXIT_FAILURE
    data = report.to_json()
    data["metadata"]["run_config"] = _run_config(args)
    log.info("N=%d s=%g %s: nu=%.6g", args.qubits, args.target_s, args.method, report.nu)
    _emit(json.dumps(data, indent=2) + "\n", args.out)
    return EXIT_OK


def sweep_rows(reports, method: str) -> list[list]:
    rows = []
    for item in reports:
        if isinstance(item, Exception):
            n, s = item.point
            rows.append([n, s, method, "", "", "", json.dumps({"error": str(item)}, sort_keys=True)])
            continue
        rows.append([
            item.num_qubits,
            item.target_s,
            method,
            " ".join(str(v) for v in item.plan.chain.terms),
            repr(item.nu),
            repr(item.single_pass_prob),
            item.plan.serialized(),
        ])
    return rows


def cmd_sweep(args) -> int:
    for n in args.qubits:
        _check_qubits(n)
    for s in args.s:
        _check_target(s)
    config = _config(args)
    reports = optimizer.sweep(args.qubits, args.s, args.method, config)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    rows = sweep_rows(reports, args.method)
    writer.writerows(rows)
    _emit(buf.getvalue(), args.out)
    failures = sum(isinstance(r, Exception) for r in reports)
    if failures:
        log.error("%d of %d sweep points failed", failures, len(reports))
    return EXIT_FAILURE if failures else EXIT_OK


def cmd_chains(args) -> int:
    if not 1 <= args.n <= MAX_TARGET:
        raise UsageError(f"n must lie in 1..{MAX_TARGET}")
    if args.max_len is not None and args.max_len < 1:
        raise UsageError("max-len must be positive")
    chains = enumerate_star_chains(args.n, args.max_len)
    data = {
        "schema_version": optimizer.SCHEMA_VERSION,
        "n": args.n,
        "max_len": args.max_len if args.max_len is not None else minimal_length(args.n) + 2,
        "minimal_length": minimal_length(args.n),
        "chains": [c.to_json() for c in chains],
    }
    _emit(json.dumps(data, indent=2) + "\n", args.out)
    return EXIT_OK


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=optimizer.METHODS, required=True)
    p.add_argument("--fixed-primates", action="store_true", help="pin every elementary primate to s = 0.5")
    p.add_argument("--restarts", type=int, default=optimizer.OptimizerConfig.restarts)
    p.add_argument("--max-evals", type=int, default=optimizer.OptimizerConfig.max_evals,
                   help="evaluation budget per simplex run")
    p.add_argument("--chain-slack", type=int, default=optimizer.OptimizerConfig.chain_slack,
                   help="chains up to this many terms longer than the shortest are searched")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42, help="single seed for all randomness")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="ghzprimate", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="oracle-versus-closed-form batteries")
    p.add_argument("--max-n", type=int, default=2)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("optimize", parents=[common], help="cheapest plan for one target")
    _add_search_flags(p)
    p.add_argument("--qubits", type=int, required=True)
    p.add_argument("--target-s", type=float, default=0.5)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", parents=[common], help="optimize a grid of targets into CSV")
    _add_search_flags(p)
    p.add_argument("--qubits", type=parse_int_range, required=True, help="e.g. 2..10")
    p.add_argument("--s", type=parse_s_grid, default=[0.5], help="e.g. 0.1:0.9:0.1")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("chains", parents=[common], help="list star addition chains")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-len", type=int)
    p.set_defaults(func=cmd_chains)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
