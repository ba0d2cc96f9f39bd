"""Command-line entry points.

Subcommands:
  run <config.toml>   execute a configured experiment; exits nonzero if any
                      verification check fails
  radii               print the radius report for a majorant given on the
                      command line
  checks --list       list available verification checks
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError
from .harness import available_checks, load_config, run_experiment
from .majorant import RadiusQuery, majorant_from_spec


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rinewton",
        description="Inexact Newton experiments on Riemannian manifolds")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a configured experiment")
    run_p.add_argument("config", help="path to a TOML experiment config")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    run_p.add_argument("--out-dir", default=None,
                       help="override the config output directory")
    run_p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="trace file format")

    radii_p = sub.add_parser("radii", help="print radii for a majorant")
    radii_p.add_argument("--kind", choices=("holder", "smale"), required=True)
    radii_p.add_argument("--constant", type=float, default=None,
                         help="Holder constant")
    radii_p.add_argument("--exponent", type=float, default=1.0,
                         help="Holder exponent in (0, 1]")
    radii_p.add_argument("--gamma", type=float, default=None,
                         help="analytic derivative scale")
    radii_p.add_argument("--budget", type=float, default=0.0,
                         help="contraction budget (< 1/spreading)")
    radii_p.add_argument("--spreading", type=float, default=1.0,
                         help="geodesic-spreading constant K >= 1")
    radii_p.add_argument("--domain-radius", type=float, default=1e12)
    radii_p.add_argument("--injectivity", type=float, default=1e12)
    radii_p.add_argument("--format", choices=("json", "text"), default="text")

    checks_p = sub.add_parser("checks", help="inspect verification checks")
    checks_p.add_argument("--list", action="store_true",
                          help="list available check names")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out_dir is not None:
        config.out_dir = args.out_dir
    if args.format is not None:
        config.trace_format = args.format
    result = run_experiment(config)
    for trace_id, trace, theta, is_probe in result.traces:
        tag = "probe" if is_probe else "run"
        final = trace.final
        print(f"{tag} {trace_id}: {trace.termination} after "
              f"{len(trace.records) - 1} iterations, "
              f"final ||X|| = {final.field_norm:.3e} (tolerance {theta:.3g})")
    for report in result.check_reports:
        status = "pass" if report.passed else "FAIL"
        print(f"check {report.name}: {status} (margin {report.margin:.3e})")
    print(f"outputs written to {config.out_dir}")
    return 0 if result.all_passed else 1


def _cmd_radii(args) -> int:
    spec = {"kind": args.kind}
    if args.kind == "holder":
        if args.constant is None:
            print("error: --constant is required for --kind holder",
                  file=sys.stderr)
            return 2
        spec.update(constant=args.constant, exponent=args.exponent)
    else:
        if args.gamma is None:
            print("error: --gamma is required for --kind smale",
                  file=sys.stderr)
            return 2
        spec.update(gamma=args.gamma)
    f = majorant_from_spec(spec)
    query = RadiusQuery(args.budget, args.spreading, args.domain_radius,
                        args.injectivity)
    report = f.radii(query)
    payload = {"majorant": f.to_dict(), "query": {
        "budget": query.budget, "spreading": query.spreading,
        "domain_radius": query.domain_radius,
        "injectivity_radius": query.injectivity_radius,
    }, "radii": report.to_dict()}
    if args.format == "json":
        print(json.dumps(payload, indent=1))
    else:
        for key, value in report.to_dict().items():
            print(f"{key}: {value}")
    return 0


def _cmd_checks(args) -> int:
    if args.list:
        for name in available_checks():
            print(name)
        return 0
    print("nothing to do; use --list", file=sys.stderr)
    return 2


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "radii":
            return _cmd_radii(args)
        return _cmd_checks(args)
    except (ConfigError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
