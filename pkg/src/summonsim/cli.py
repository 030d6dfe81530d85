"""Command-line entry point: run a system/scenario, or replay a trace.

Exit codes: 0 ok, 1 scenario assertion failed (or trace violations found),
2 configuration / parse error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .launcher import (
    ConfigError,
    LaunchConfig,
    Scenario,
    TraceParseError,
    launch,
    replay,
    run_scenario,
)

DEFAULT_IDLE_DURATION = 10.0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="summonsim")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="launch the vehicle system")
    run.add_argument("--config", type=Path, help="JSON launch config")
    run.add_argument("--scenario", type=Path, help="JSON scenario to execute")
    run.add_argument("--seed", type=int, help="RNG seed override")
    run.add_argument("--clock", choices=["wall", "logical"], help="clock mode override")
    run.add_argument("--port", type=int, help="HTTP port override")
    run.add_argument("--trace", type=Path, help="trace output path")

    rep = sub.add_parser("replay", help="verify a recorded trace")
    rep.add_argument("trace", type=Path)
    return parser


def _load_config(args) -> LaunchConfig:
    if args.config:
        config = LaunchConfig.from_json(args.config.read_text())
    else:
        config = LaunchConfig()
    if args.seed is not None:
        config.seed = args.seed
    if args.clock is not None:
        config.clock = args.clock
    if args.port is not None:
        config.http_port = args.port
    if args.trace is not None:
        config.trace = str(args.trace)
    if args.scenario is not None:
        config.scenario = str(args.scenario)
    config.validate()
    return config


def cmd_run(args) -> int:
    config = _load_config(args)
    if config.scenario:
        scenario = Scenario.from_json(Path(config.scenario).read_text())
        return run_scenario(config, scenario)
    with launch(config) as system:
        if config.clock == "wall":
            print(f"running; telemetry on http://{config.http_host}:{config.http_port}/telemetry")
            try:
                system.run_wall()
            except KeyboardInterrupt:
                pass
        else:
            system.run_until(DEFAULT_IDLE_DURATION)
    return 0


def cmd_replay(args) -> int:
    report = replay(args.trace)
    sys.stdout.write(report.to_text())
    return 1 if report.violations else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_replay(args)
    except (ConfigError, TraceParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
