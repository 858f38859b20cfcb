"""Command line interface.

wignerlab run CONFIG [--seed N] [--points N] [--out-dir DIR] [--format F]
    Run a configured experiment, print one [PASS]/[FAIL] line per check,
    write the reports.  Exit 0 when every check passed, 1 when some check
    failed, 2 on an invalid config, 3 when the pipeline could not finish.

wignerlab check-algebra [--blocks 2,1] [--rank 3] [--seed N] [--trials N]
    Seeded invariant battery for the algebra and module layers.

wignerlab check-phi [--epsilon X] [--p X] [--q X] [--c X|auto]
    Evaluate the two decay conditions for a power control function.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import load_config
from .control import PowerControl, check_decay_conditions, suggest_c
from .exceptions import ConfigError, UnsupportedRegimeError
from .experiment import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG,
    EXIT_OK,
    run_experiment,
)
from .verify import run_algebra_checks

__all__ = ["main"]


def _print_record(rec, out) -> None:
    verdict = "[PASS]" if rec.passed else "[FAIL]"
    print(f"{verdict} {rec.name}: worst={rec.worst:.3e} "
          f"threshold={rec.threshold:.3e}  ({rec.property})", file=out)
    if not rec.passed and rec.witness:
        print(f"       worst case at {rec.witness}", file=out)


def _cmd_run(args, out) -> int:
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        if args.points is not None:
            if args.points < 0:
                raise ConfigError("--points must be >= 0")
            config = replace(config, n_points=args.points)
        if args.out_dir is not None:
            config = replace(config, out_dir=args.out_dir)
        if args.format is not None:
            config = replace(config, format=args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    outcome = run_experiment(config)
    if outcome.failure:
        detail = outcome.payload.get("failure", {})
        print(f"[FAIL] pipeline incomplete at stage "
              f"'{detail.get('stage', '?')}': {outcome.failure}", file=out)
        for path in outcome.paths.values():
            print(f"wrote {path}", file=out)
        return outcome.exit_code

    for rec in outcome.verification.records:
        _print_record(rec, out)
    for item in outcome.verification.skipped:
        print(f"[SKIP] {item['name']}: {item['reason']}", file=out)
    decay = outcome.payload["decay"]
    for label in ("condition_a", "condition_b"):
        verdict = "[PASS]" if decay[label] else "[FAIL]"
        print(f"{verdict} decay_{label}", file=out)

    cert = outcome.payload["certificate"]
    print(f"certificate: delta={cert['delta_final']} "
          f"halvings={cert['halvings']} pairs={cert['n_pairs']}", file=out)
    summary = outcome.payload["summary"]
    overall = "[PASS]" if summary["overall_pass"] else "[FAIL]"
    print(f"{overall} overall ({summary['n_points']} points, "
          f"{summary['n_cert_pairs']} certified pairs)", file=out)
    for path in outcome.paths.values():
        print(f"wrote {path}", file=out)
    return outcome.exit_code


def _cmd_check_algebra(args, out) -> int:
    try:
        blocks = tuple(int(tok) for tok in args.blocks.split(","))
        if not blocks or any(b < 1 for b in blocks):
            raise ValueError
    except ValueError:
        print(f"config error: --blocks must be comma-separated integers "
              f">= 1, got {args.blocks!r}", file=sys.stderr)
        return EXIT_CONFIG
    if args.rank < 1 or args.trials < 1 or args.tol <= 0:
        print("config error: --rank and --trials must be >= 1, --tol > 0",
              file=sys.stderr)
        return EXIT_CONFIG
    report = run_algebra_checks(blocks, rank=args.rank, seed=args.seed,
                                trials=args.trials, tol=args.tol)
    for rec in report.records:
        _print_record(rec, out)
    verdict = "[PASS]" if report.overall_pass else "[FAIL]"
    print(f"{verdict} overall ({len(report.records)} invariants, "
          f"{args.trials} trials)", file=out)
    return EXIT_OK if report.overall_pass else EXIT_CHECK_FAILED


def _cmd_check_phi(args, out) -> int:
    try:
        if args.c == "auto":
            c = suggest_c(args.p, args.q)
        else:
            c = float(args.c)
        phi = PowerControl(epsilon=args.epsilon, p=args.p, q=args.q, c=c)
    except (UnsupportedRegimeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    norms = [(1.0, 1.0), (2.0, 3.0), (0.5, 0.25), (4.0, 0.1)]
    decay = check_decay_conditions(phi, norms, n_terms=args.n_terms)
    print(f"control: epsilon={phi.epsilon} p={phi.p} q={phi.q} c={phi.c}",
          file=out)
    print(f"scaling ratios: first={decay.ratio_first:.6g} "
          f"second={decay.ratio_second:.6g} "
          f"quadratic={decay.ratio_quadratic:.6g}", file=out)
    for label, ok in (("condition_a", decay.condition_a),
                      ("condition_b", decay.condition_b)):
        verdict = "[PASS]" if ok else "[FAIL]"
        print(f"{verdict} {label}", file=out)
    verdict = "[PASS]" if decay.passed else "[FAIL]"
    print(f"{verdict} overall", file=out)
    return EXIT_OK if decay.passed else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wignerlab",
        description="numerical stability laboratory for approximate "
                    "pairing-preserving maps")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured experiment")
    p_run.add_argument("config", help="path to a YAML config file")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_run.add_argument("--points", type=int, default=None,
                       help="override the number of sample points")
    p_run.add_argument("--out-dir", default=None,
                       help="override the output directory")
    p_run.add_argument("--format", choices=("json", "csv", "both"),
                       default=None, help="override the report format")

    p_alg = sub.add_parser("check-algebra",
                           help="verify algebra and module invariants")
    p_alg.add_argument("--blocks", default="2,1",
                       help="comma-separated block sizes (default 2,1)")
    p_alg.add_argument("--rank", type=int, default=3)
    p_alg.add_argument("--seed", type=int, default=0)
    p_alg.add_argument("--trials", type=int, default=8)
    p_alg.add_argument("--tol", type=float, default=1e-8)

    p_phi = sub.add_parser("check-phi",
                           help="evaluate control decay conditions")
    p_phi.add_argument("--epsilon", type=float, default=1e-2)
    p_phi.add_argument("--p", type=float, default=2.0)
    p_phi.add_argument("--q", type=float, default=2.0)
    p_phi.add_argument("--c", default="auto",
                       help="scaling constant, a number or 'auto'")
    p_phi.add_argument("--n-terms", type=int, default=40)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout
    if args.command == "run":
        return _cmd_run(args, out)
    if args.command == "check-algebra":
        return _cmd_check_algebra(args, out)
    return _cmd_check_phi(args, out)


if __name__ == "__main__":
    raise SystemExit(main())
