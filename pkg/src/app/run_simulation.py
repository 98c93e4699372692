"""
Main Runner Script

Entry point for the CPMG spin-dynamics engine.

Usage:
    python -m src.app.run_simulation scenario linear-ramp --out data/output
    python -m src.app.run_simulation cycle --omega0 0.5 --te-ratio 8
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from src import __version__
from src.core.exceptions import ConfigError, InvalidInputError
from src.core.config import load_config
from src.app.orchestrator import FORMATS, SimulationOrchestrator

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def print_banner() -> None:
    """Display application banner"""
    print("\n" + "=" * 70)
    print(" CPMG SPIN DYNAMICS ENGINE")
    print(f" version {__version__}")
    print("=" * 70 + "\n")


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def _add_field_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--omega0", type=float, required=True,
                        help="B0 offset in units of the nominal nutation frequency")
    parser.add_argument("--omega1", type=float, default=1.0,
                        help="B1 amplitude in units of the nominal nutation frequency")
    parser.add_argument("--te-ratio", type=float, default=None,
                        help="echo spacing over the 180-degree pulse length (default: config timing)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_simulation",
        description="Simulate and analyse CPMG echo trains under time-dependent fields.",
    )
    parser.add_argument("--config", default=None, help="YAML or JSON configuration file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=None, help="worker pool size")
    parser.add_argument("--full-scale", action="store_true", default=None,
                        help="use full-resolution scenario grids")
    parser.add_argument("--format", choices=FORMATS, default="csv", help="table output format")
    parser.add_argument("--progress", action="store_true", help="show progress bars")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for INFO, -vv for DEBUG logging")

    commands = parser.add_subparsers(dest="command", required=True)

    cycle = commands.add_parser("cycle", help="effective rotation of one refocusing cycle")
    _add_field_arguments(cycle)
    cycle.add_argument("--pulse-phase", type=float, default=0.0, help="refocusing pulse phase (rad)")

    adiabaticity = commands.add_parser("adiabaticity", help="instantaneous adiabaticity parameter")
    _add_field_arguments(adiabaticity)
    adiabaticity.add_argument("--ramp0", type=float, default=0.0, help="d(omega0)/d(tau) per echo spacing")
    adiabaticity.add_argument("--ramp1", type=float, default=0.0, help="d(omega1)/d(tau) per echo spacing")

    commands.add_parser("simulate", help="simulate the configured field profile")

    decompose = commands.add_parser("decompose", help="split a magnetization into CPMG and CP modes")
    _add_field_arguments(decompose)
    decompose.add_argument("--m", type=float, nargs=3, required=True, metavar=("MX", "MY", "MZ"),
                           help="magnetization vector")

    scenario = commands.add_parser("scenario", help="run a canned experiment")
    scenario.add_argument("name", help="scenario name")

    commands.add_parser("sweep", help="evaluate the configured parameter grid")
    return parser


def command_arguments(args: argparse.Namespace, config) -> Dict[str, Any]:
    """Keyword arguments for ``SimulationOrchestrator.execute``."""
    if args.command == "scenario":
        return {"name": args.name}
    if args.command not in ("cycle", "adiabaticity", "decompose"):
        return {}

    te_ratio = args.te_ratio if args.te_ratio is not None else config.timing.te_ratio
    if te_ratio <= 1.0:
        raise ConfigError([f"te_ratio: must exceed 1 (got {te_ratio!r})"])
    if args.omega1 < 0.0:
        raise ConfigError([f"omega1: must be non-negative (got {args.omega1!r})"])

    kwargs: Dict[str, Any] = {"omega0": args.omega0, "omega1": args.omega1, "te_ratio": te_ratio}
    if args.command == "cycle":
        kwargs["pulse_phase"] = args.pulse_phase
    elif args.command == "adiabaticity":
        kwargs.update(ramp0=args.ramp0, ramp1=args.ramp1)
    else:
        kwargs["magnetization"] = list(args.m)
    return kwargs


def run(args: argparse.Namespace) -> None:
    overrides = {
        "output_dir": args.out,
        "threads": args.threads,
        "full_scale": args.full_scale,
    }
    if args.command == "scenario":
        overrides["scenario"] = args.name
    config = load_config(args.config, overrides)
    kwargs = command_arguments(args, config)

    orchestrator = SimulationOrchestrator(config, show_progress=args.progress)
    orchestrator.execute(args.command, fmt=args.format, **kwargs)


def main(argv: Optional[List[str]] = None) -> int:
    """Application entry point"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or EXIT_OK)

    configure_logging(args.verbose)
    print_banner()

    try:
        run(args)
        return EXIT_OK
    except ConfigError as exc:
        print("❌ Invalid configuration", file=sys.stderr)
        for message in exc.messages:
            print(f"  {message}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidInputError as exc:
        print(f"❌ Invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # pylint: disable=broad-except
        logger.debug("Execution failed", exc_info=True)
        print("\n❌ Execution failed", file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
