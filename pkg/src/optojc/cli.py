"""Command-line front end.

    optojc run --config FILE [--mode analytic|numeric|compare] [--out PREFIX]
    optojc scenario NAME [--mode ...] [--out PREFIX]
    optojc list-scenarios

Exit codes: 0 success, 2 configuration/validation problem, 3 numerical
failure (divergence, norm drift, singular factorization).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .analytic import UndefinedQError
from .dressing import FactorizationSingularityError
from .harness import (
    ConfigError,
    RunConfig,
    builtin_names,
    builtin_scenario,
    parse_config,
    run,
)
from .model import ValidationError, validate_scenario
from .ode import OdeError
from .oracle import NormDriftError

_NUMERIC_FAILURES = (OdeError, NormDriftError, FactorizationSingularityError,
                     UndefinedQError, FloatingPointError)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optojc",
        description="Pumped optomechanical cavity with a two-level atom: "
                    "factorized vs brute-force evolution",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a key=value config file")
    p_run.add_argument("--config", required=True, help="path to the config file")
    p_run.add_argument("--mode", choices=("analytic", "numeric", "compare"),
                       help="override the config's mode")
    p_run.add_argument("--out", default=None,
                       help="output path prefix (default: '<label>_')")

    p_sc = sub.add_parser("scenario", help="execute a built-in scenario")
    p_sc.add_argument("name", help="one of: " + ", ".join(builtin_names()))
    p_sc.add_argument("--mode", choices=("analytic", "numeric", "compare"),
                      default="analytic")
    p_sc.add_argument("--out", default=None,
                      help="output path prefix (default: '<name>_')")

    sub.add_parser("list-scenarios", help="print the built-in scenario names")
    return parser


def _execute(config: RunConfig, out_prefix: str) -> int:
    result = run(config, out_prefix)
    for path in result["paths"]:
        print(path)
    report = result["report"]
    if report is not None:
        print(report.text(), end="")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "list-scenarios":
            for name in builtin_names():
                print(name)
            return 0
        if args.command == "run":
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                print(f"error: cannot read config: {exc}", file=sys.stderr)
                return 2
            config = parse_config(text)
            if args.mode:
                config = replace(config, mode=args.mode)
            out = args.out if args.out is not None else f"{config.scenario.label}_"
            return _execute(config, out)
        if args.command == "scenario":
            try:
                scenario = builtin_scenario(args.name)
            except KeyError as exc:
                print(f"error: {exc.args[0]}", file=sys.stderr)
                return 2
            scenario = validate_scenario(scenario)
            config = RunConfig(scenario=scenario, mode=args.mode,
                               emit_jc_reference=(args.name == "fig1"))
            out = args.out if args.out is not None else f"{args.name}_"
            return _execute(config, out)
        raise AssertionError(f"unhandled command {args.command!r}")
    except (ConfigError, ValidationError) as exc:
        for msg in exc.errors:
            print(f"error: {msg}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_FAILURES as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
