"""navigo-sim - Vehicular NDN streaming simulator CLI."""

import argparse
import logging
import sys
import time
from collections.abc import Callable
from pathlib import Path
from typing import Any

from navigo_cli import __version__
from navigo_cli.cli.generator import LANES_PATTERNS, GridSpec, generate_grid_scenario
from navigo_cli.cli.sweep import SWEEP_AXES, aggregate, plan_cells, run_sweep, write_sweep_csv
from navigo_core.core.config_service import ConfigService, parse_override
from navigo_core.core.errors import (
    CalibrationError,
    ConfigError,
    GeoDomainError,
    LabelParseError,
    RoadGraphError,
    TraceError,
)
from navigo_core.sim.runner import Simulation
from navigo_core.sim.scenario import load_scenario_file
from navigo_core.strategies.registry import list_strategies

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

LOG_FILE = "navigo-sim.log"

# Errors caused by the user's inputs rather than by the simulator
INPUT_ERRORS = (
    ConfigError,
    RoadGraphError,
    TraceError,
    LabelParseError,
    GeoDomainError,
    CalibrationError,
)


def configure_logging(log_file: Path, verbose: bool = False) -> None:
    """Log to ``log_file`` and the console; DEBUG with ``verbose``."""
    log_file.parent.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.FileHandler(log_file, encoding="utf-8"), logging.StreamHandler()],
    )
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
        logger.debug("Verbose mode enabled")


def format_summary(title: str, items: list[tuple[str, Any]]) -> str:
    lines = ["\n" + "=" * 60, title, "=" * 60]
    for key, value in items:
        if value is None:
            shown = "n/a"
        elif isinstance(value, float):
            shown = f"{value:.4f}"
        else:
            shown = str(value)
        lines.append(f"  {key}: {shown}")
    lines.append("=" * 60)
    return "\n".join(lines)


def collect_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """``--set`` pairs plus the ``--strategy``/``--seed`` shortcuts, which win."""
    overrides = dict(parse_override(text) for text in args.set or [])
    if getattr(args, "strategy", None):
        overrides["strategy_name"] = args.strategy
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return overrides


# ---- commands ----


def cmd_run(args: argparse.Namespace) -> int:
    started = time.time()
    scenario = load_scenario_file(Path(args.config), collect_overrides(args))
    simulation = Simulation(scenario)
    report = simulation.run()
    output_dir = Path(args.output) if args.output else scenario.output_dir
    outputs = simulation.write_outputs(output_dir)
    config = scenario.config
    items = [
        ("strategy", config.strategy_name),
        ("seed", config.seed),
        *report.summary_items(),
        ("frames_sent", report.frames_sent),
        ("origin_requests", report.origin_requests),
        ("elapsed_s", round(time.time() - started, 1)),
        ("output", outputs.run_dir),
    ]
    print(format_summary(f"Run finished: {config.name}", items))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    base = dict(parse_override(text) for text in args.set or [])
    service = ConfigService(config_path)
    config = service.load_config(base)
    # fail before any worker starts
    load_scenario_file(config_path, base)
    strategies = args.strategies or [config.strategy_name]
    seed = args.seed if args.seed is not None else config.seed
    cells = plan_cells(args.axis, args.values, strategies, seed, args.seeds)
    reports = run_sweep(config_path, args.axis, cells, base, jobs=args.jobs)
    rows = aggregate(args.axis, cells, reports)
    output_dir = Path(args.output) if args.output else config.output_dir(service.base_dir)
    table = write_sweep_csv(output_dir / f"sweep_{args.axis}.csv", args.axis, rows)
    items = [
        ("axis", args.axis),
        ("values", ", ".join(f"{v:g}" for v in args.values)),
        ("strategies", ", ".join(strategies)),
        ("runs", len(cells)),
        ("table", table),
    ]
    print(format_summary(f"Sweep finished: {config.name}", items))
    return EXIT_OK


def cmd_gen_grid(args: argparse.Namespace) -> int:
    spec = GridSpec(
        rows=args.rows, cols=args.cols, block_m=args.block, lanes_pattern=args.lanes_pattern
    )
    path = generate_grid_scenario(
        Path(args.out), spec, args.cars, args.duration, seed=args.seed, name=args.name
    )
    print(f"Scenario written to {path}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    scenario = load_scenario_file(Path(args.config), collect_overrides(args))
    config = scenario.config
    items = [
        ("strategy", config.strategy_name),
        ("road nodes", len(scenario.graph)),
        ("road edges", scenario.graph.graph.number_of_edges()),
        ("junctions", len(scenario.graph.junctions)),
        ("streets", len(scenario.graph.streets)),
        ("vehicles", len(scenario.trace.vehicles())),
        ("trace samples", len(scenario.trace)),
        ("off-road samples", len(scenario.off_road)),
        ("rsus", len(config.rsus)),
    ]
    print(format_summary(f"Scenario OK: {config.name}", items))
    return EXIT_OK


# ---- parser ----


def _add_override_args(parser: argparse.ArgumentParser, shortcuts: bool = True) -> None:
    parser.add_argument("config", help="Scenario JSON file")
    parser.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="Override a config key, e.g. --set radio.range_m=200 (repeatable)",
    )
    if shortcuts:
        parser.add_argument(
            "--strategy", choices=list_strategies(), help="Forwarding strategy override"
        )
    parser.add_argument("--seed", type=int, help="Random seed override")


def create_parser() -> argparse.ArgumentParser:
    """Create CLI argument parser."""
    parser = argparse.ArgumentParser(
        prog="navigo-sim",
        description="navigo-sim - Geographic NDN forwarding for vehicular music streaming",
        epilog="""
Examples:
  # Generate a 5x5 Manhattan grid with 60 cars for 300 s
  %(prog)s gen-grid --cars 60 --duration 300 --out ./grid

  # Check a scenario without running it
  %(prog)s validate ./grid/scenario.json

  # Run it, then run the flooding baseline with another seed
  %(prog)s run ./grid/scenario.json
  %(prog)s run ./grid/scenario.json --strategy flood --seed 7

  # Sweep the consumer share over 5 seeds on 4 processes
  %(prog)s sweep ./grid/scenario.json --axis consumer_fraction \\
      --values 0.02 0.1 0.32 --seeds 5 --jobs 4

Exit codes: 0 ok, 2 invalid input, 3 runtime error.
Set NAVIGO_OUTPUT_DIR to redirect every output directory.
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--verbose", "-v", action="store_true", help="Enable verbose output for debugging"
    )
    parser.add_argument(
        "--log-file",
        default=LOG_FILE,
        metavar="PATH",
        help=f"Log file (default: {LOG_FILE})",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    run = commands.add_parser("run", help="Run one scenario")
    _add_override_args(run)
    run.add_argument("--output", "-o", help="Output directory (default: from the scenario)")
    run.set_defaults(handler=cmd_run)

    sweep = commands.add_parser("sweep", help="Run a scenario over a range of values")
    _add_override_args(sweep, shortcuts=False)
    sweep.add_argument("--axis", required=True, choices=list(SWEEP_AXES))
    sweep.add_argument("--values", required=True, type=float, nargs="+", metavar="V")
    sweep.add_argument(
        "--seeds", type=int, default=1, metavar="K", help="Runs per value (default: 1)"
    )
    sweep.add_argument(
        "--strategies",
        nargs="+",
        choices=list_strategies(),
        help="Compare strategies in one table (default: the scenario's)",
    )
    sweep.add_argument(
        "--jobs", "-j", type=int, default=1, metavar="N", help="Worker processes (default: 1)"
    )
    sweep.add_argument("--output", "-o", help="Output directory (default: from the scenario)")
    sweep.set_defaults(handler=cmd_sweep)

    gen = commands.add_parser("gen-grid", help="Generate a Manhattan-grid scenario")
    gen.add_argument("--rows", type=int, default=5, help="Junction rows (default: 5)")
    gen.add_argument("--cols", type=int, default=5, help="Junction columns (default: 5)")
    gen.add_argument("--block", type=float, default=200.0, help="Block length in m (default: 200)")
    gen.add_argument("--lanes-pattern", choices=LANES_PATTERNS, default="uniform2")
    gen.add_argument("--cars", type=int, default=50, help="Vehicles (default: 50)")
    gen.add_argument("--duration", type=float, default=300.0, help="Seconds (default: 300)")
    gen.add_argument("--seed", type=int, default=1, help="Trace seed (default: 1)")
    gen.add_argument("--name", help="Scenario name (default: gridRxC)")
    gen.add_argument("--out", required=True, help="Directory for the scenario files")
    gen.set_defaults(handler=cmd_gen_grid)

    validate = commands.add_parser("validate", help="Load and check a scenario")
    _add_override_args(validate)
    validate.set_defaults(handler=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> None:
    """Main CLI entry point."""
    parser = create_parser()
    args = parser.parse_args(argv)
    configure_logging(Path(args.log_file), args.verbose)

    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        code = handler(args)
    except INPUT_ERRORS as e:
        logger.error(f"Invalid input: {e}")
        print(f"\nError: {e}", file=sys.stderr)
        code = EXIT_CONFIG
    except Exception as e:
        logger.exception(f"Run failed: {e}")
        print(f"\nRuntime error: {e}", file=sys.stderr)
        code = EXIT_RUNTIME

    sys.exit(code)


if __name__ == "__main__":
    main()
