#!/usr/bin/env python3
"""
Command Line Interface for hypres.

Every subcommand reads a run configuration document, runs the pipeline up
to the stage it needs and prints the report JSON on stdout. Exit status:
0 success, 2 configuration error, 3 numerical failure, 4 hypothesis
failure under --strict.
"""

import argparse
import sys
from typing import Any, Dict, List, Optional

from hypres import __version__
from hypres.data.orbit_cache import OrbitCache
from hypres.data.run_config import load_run_config
from hypres.data.serialization import dumps
from hypres.utils.config import get_config, validate_config
from hypres.utils.error_manager import HypothesisFailure, get_error_manager
from hypres.utils.logging import configure_logging
from hypres.workflows.pipeline import HypresPipeline

# subcommand -> report sections
SECTIONS = {
    "find-orbit": ["orbit"],
    "continue": ["orbit", "family"],
    "floquet": ["orbit", "floquet"],
    "check": ["orbit", "hypotheses"],
    "resonances": ["orbit", "resonances"],
}


def _fmt(value: Any) -> str:
    if isinstance(value, complex):
        sign = "+" if value.imag >= 0 else "-"
        return f"{value.real:.10g} {sign} {abs(value.imag):.10g}i"
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def floquet_table(pipeline: HypresPipeline) -> str:
    """Human-readable summary of the Floquet data."""
    data = pipeline.floquet()
    orbit = pipeline.find_orbit()
    lines = [
        f"system      {pipeline.system.name}",
        f"energy      {_fmt(orbit.energy)}",
        f"period      {_fmt(orbit.period)}",
        "",
        f"{'exponent':<34}{'mult':>5}  {'type':<16}{'multiplier':<34}",
    ]
    for e in data.exponents:
        lines.append(f"{_fmt(e.value):<34}{e.multiplicity:>5}  {e.tag:<16}{_fmt(e.multiplier):<34}")
    lines += [
        "",
        f"hyperbolic dimension  {data.hyperbolic_dimension}",
        f"completely elliptic   {data.completely_elliptic}",
        f"log residual          {_fmt(data.log_residual)}",
        f"pairing residual      {_fmt(data.pairing_residual)}",
    ]
    return "\n".join(lines)


def hypothesis_table(pipeline: HypresPipeline) -> str:
    """Human-readable pass/fail table of the hypothesis certificates."""
    report = pipeline.check()
    rows = [
        ("principal type", report.principal_type_ok),
        ("orbit hyperbolic", report.orbit_hyperbolic_ok),
        ("Williamson", report.williamson_ok),
        ("non-resonance", report.nonresonance_ok),
        ("strong non-resonance", report.strong_nonresonance_ok),
    ]
    lines = [f"{'certificate':<24}{'status':<8}"]
    for name, ok in rows:
        lines.append(f"{name:<24}{'pass' if ok else 'FAIL':<8}")
    for name, witness in report.witnesses.items():
        if witness is not None:
            lines.append(f"witness ({name}): k = {tuple(witness)}")
    lines.append(f"K = {report.K_bound}, tol = {_fmt(report.tolerance)}")
    lines += [f"note: {note}" for note in report.notes]
    return "\n".join(lines)


def run_command(command: str, args: argparse.Namespace) -> int:
    settings = get_config()
    config = load_run_config(args.config)
    cache = OrbitCache(path=args.cache) if args.cache else OrbitCache()
    pipeline = HypresPipeline(config, settings, cache)

    if command == "report":
        report = pipeline.full_report()
    else:
        report = pipeline.build_report(SECTIONS[command])

    if command == "floquet":
        print(floquet_table(pipeline))
        print()
    elif command == "check":
        print(hypothesis_table(pipeline))
        print()
    sys.stdout.write(dumps(report))

    directory = config.output_directory(args.out)
    if directory is not None:
        pipeline.write_outputs(report, directory)

    if args.strict and command in ("check", "report"):
        hypotheses = pipeline.check()
        if not hypotheses.all_ok:
            raise HypothesisFailure("hypothesis certificates failed",
                                    context={"failures": hypotheses.failures})
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="Run configuration document (JSON)")
    common.add_argument("--out", default=None, help="Directory for report.json and CSV side files")
    common.add_argument("--strict", action="store_true", help="Exit with status 4 when a hypothesis fails")
    common.add_argument("--json-errors", action="store_true", help="Print failures as JSON records")
    common.add_argument("--cache", default=None, help="Orbit cache file (overrides HYPRES_CACHE)")

    parser = argparse.ArgumentParser(description="hypres command line interface")
    parser.add_argument("--version", action="version", version=f"hypres {__version__}")
    subparsers = parser.add_subparsers(dest="command", help="Available commands")
    subparsers.add_parser("find-orbit", parents=[common], help="Find the periodic orbit at the run energy")
    subparsers.add_parser("continue", parents=[common], help="Continue the orbit over the energy grid")
    subparsers.add_parser("floquet", parents=[common], help="Floquet multipliers, exponents and b")
    subparsers.add_parser("check", parents=[common], help="Certify the dynamical hypotheses")
    subparsers.add_parser("resonances", parents=[common], help="Leading-order resonance strings")
    subparsers.add_parser("report", parents=[common], help="Run every stage and print one report")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2

    settings = get_config()
    configure_logging(settings.log_level, settings.log_format)
    if not validate_config(settings):
        print("Configuration validation failed. Please check your HYPRES_* settings.", file=sys.stderr)
        return 2

    try:
        return run_command(args.command, args)
    except Exception as e:
        record: Dict[str, Any] = get_error_manager().handle_error(
            e, args.command, {"config": args.config})
        if args.json_errors:
            sys.stdout.write(dumps(record))
        else:
            print(f"error [{record['code']}]: {record['message']}", file=sys.stderr)
        return int(record["exit_status"])


if __name__ == "__main__":
    sys.exit(main())
