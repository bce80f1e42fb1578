import argparse
import logging
import os
import sys

from dotenv import load_dotenv

from find_markov_gap.utils.config import load_config
from find_markov_gap.utils.errors import EXIT_CHECKS_FAILED, EXIT_NOT_CONVERGED, EXIT_OK, MarkovGapError
from find_markov_gap.utils.sentry import init_sentry

load_dotenv()

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s %(levelname)s %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S %Z'
)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="config.yaml", help="Path to the YAML configuration file.")
    common.add_argument("--seed", type=int, default=None, help="Override SEED from the config.")
    common.add_argument("--out", default=None, help="Output directory (overrides OUTPUT.DIR).")
    common.add_argument("--jobs", type=int, default=1, help="Concurrent sweep rows.")
    common.add_argument("--force", action="store_true", help="Run even above OUTPUT.MAX_DIMENSION.")
    common.add_argument("--verbose", action="store_true", help="Debug logging.")
    common.add_argument("--reset-db", action="store_true", help="Delete the results database before recording.")

    parser = argparse.ArgumentParser(description="Markov gap of free-fermion lattice states.")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("run", parents=[common], help="Bare and optimized Markov gap for one configuration.")
    sweep = commands.add_parser("sweep", parents=[common], help="One run per value of a geometry key.")
    sweep.add_argument("--key", required=True, choices=["R", "L_A", "shape"])
    sweep.add_argument("--values", nargs="*", default=[], help="Values of the sweep key.")
    commands.add_parser("validate", parents=[common], help="Check purity, Chern numbers, margins and symmetry.")
    oracle = commands.add_parser("oracle-check", parents=[common], help="Gaussian formulas against brute force.")
    oracle.add_argument("--states", type=int, default=50, help="Number of random Slater states.")
    bands = commands.add_parser("bands", parents=[common], help="Export the band structure as CSV.")
    bands.add_argument("--grid", type=int, default=64, help="Momentum grid size per direction.")
    return parser


def execute(args: argparse.Namespace) -> int:
    config = load_config(args.config).with_overrides(SEED=args.seed, OUTPUT_DIR=args.out)
    record = config.output.record_to_database and args.command in ("run", "sweep")
    if record:
        from find_markov_gap.database_manage.db_manage import DataBaseManager

        DataBaseManager(config.output.database_dir).prepare(reset=args.reset_db)

    from find_markov_gap.gap_monitor.monitor_gap import MarkovGapMonitor

    monitor = MarkovGapMonitor(config, force=args.force)
    if args.command == "run":
        report = monitor.run()
        return EXIT_OK if report.converged else EXIT_NOT_CONVERGED
    if args.command == "sweep":
        monitor.sweep(args.key, args.values, jobs=args.jobs)
        return EXIT_OK
    if args.command == "validate":
        return EXIT_OK if monitor.validate().passed else EXIT_CHECKS_FAILED
    if args.command == "oracle-check":
        summary = monitor.check_oracle(n_states=args.states)
        return EXIT_OK if summary.passed else EXIT_CHECKS_FAILED
    monitor.export_bands(grid_n=args.grid)
    return EXIT_OK


def main(argv=None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    init_sentry(os.getenv("SENTRY_DSN"), os.getenv("SENTRY_ENVIRONMENT"))
    try:
        return execute(args)
    except MarkovGapError as e:
        logging.error(f"{type(e).__name__}: {e}")
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())
