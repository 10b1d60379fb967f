#!/usr/bin/env python3
"""
dosctrl Batch CLI - certification and simulation of networked control loops under DoS

Subcommands: certify, simulate, dos-fit, reproduce-iv.
Diagnostics go to stderr; stdout carries only the path of the produced
document. Exit codes: 0 success / certified, 2 not certified, 1 error.
"""

import sys
import os
import argparse
from pathlib import Path

# Load environment variables from .env file
from dotenv import load_dotenv
load_dotenv(Path(__file__).resolve().parent / '.env')

# Configure Django settings for CLI usage
import django
from django.conf import settings
if not settings.configured:
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'dosctrl_project.settings')
    django.setup()

from rich.console import Console

from dosctrl_app.utils.errors import DosCtrlError
from dosctrl_app.utils.error_monitor import error_monitor
from dosctrl_app.utils.logger import LogLevel, OperationType, RunLogger
from dosctrl_app.utils.runner import EXIT_ERROR, optional_float, run_command

OPERATIONS = {
    'certify': OperationType.CERTIFY,
    'simulate': OperationType.SIMULATE,
    'dos-fit': OperationType.DOS_FIT,
    'reproduce-iv': OperationType.REPRODUCE,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="dosctrl - DoS-resilient networked control toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""Examples:
  python cli.py certify --config scenario.json             # Robustness report
  python cli.py simulate --config scenario.json --seed 3   # Trace + metrics
  python cli.py simulate --config scenario.json --sweep    # Failure-tolerance sweep
  python cli.py dos-fit attacks.csv --tau-d 0.96 --T 1.29 --delta 0.1
  python cli.py reproduce-iv --out results/                # Embedded benchmark
"""
    )
    parser.add_argument('--quiet', '-q', action='store_true',
                        help='Only warnings and errors on stderr')
    subparsers = parser.add_subparsers(dest='command', required=True)

    def common(sub, config=True):
        if config:
            sub.add_argument('--config', '-c', required=True, help='Scenario JSON document')
        sub.add_argument('--out', '-o', default=None,
                         help='Output directory (default: DOSCTRL_OUT_DIR)')
        sub.add_argument('--seed', type=int, default=None,
                         help='Seed override (beats the scenario and DOSCTRL_SEED)')

    common(subparsers.add_parser('certify', help='Certify a controller against a DoS budget'))

    simulate = subparsers.add_parser('simulate', help='Simulate a scenario')
    common(simulate)
    simulate.add_argument('--sweep', action='store_true',
                          help='Run the failure-tolerance sweep instead of one run')
    simulate.add_argument('--duty-cycles', type=float, nargs='+', default=None,
                          help='Duty cycles for --sweep')

    dos_fit = subparsers.add_parser('dos-fit', help='Fit the minimal DoS budget of an h,tau trace')
    dos_fit.add_argument('trace', help='DoS trace CSV with header h,tau')
    dos_fit.add_argument('--tau-d', dest='tau_D', type=optional_float, default=None,
                         help='Average dwell time τ_D (default: unbounded)')
    dos_fit.add_argument('--T', dest='T', type=optional_float, default=None,
                         help='Duration ratio T (default: unbounded)')
    dos_fit.add_argument('--delta', type=float, default=None,
                         help='Transmission period Δ for the feasibility check')
    dos_fit.add_argument('--horizon', type=float, default=None,
                         help='Fitting horizon (default: end of the last interval)')
    dos_fit.add_argument('--out', '-o', default=None, help='Output directory')

    reproduce = subparsers.add_parser('reproduce-iv', help='Run the embedded benchmark')
    common(reproduce, config=False)
    reproduce.add_argument('--workers', type=int, default=None,
                           help='Concurrent simulation runs (default: DOSCTRL_WORKERS)')
    return parser


def main(argv=None):
    """Main CLI entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    level = LogLevel.WARNING if args.quiet else LogLevel.parse(settings.DOSCTRL_LOG_LEVEL)
    console = Console(stderr=True, quiet=args.quiet)
    operation_type = OPERATIONS[args.command]

    with RunLogger(log_dir=settings.DOSCTRL_LOG_DIR,
                   enable_file_logging=settings.DOSCTRL_FILE_LOGGING,
                   log_level=level) as run_logger:
        operation_id = run_logger.start_operation(operation_type)
        try:
            code, path = run_command(args.command, vars(args), console=console,
                                     run_logger=run_logger)
        except (DosCtrlError, OSError) as e:
            run_logger.log_error(operation_type, e)
            run_logger.end_operation(operation_id, operation_type, success=False)
            message = error_monitor.record_error(e, command=args.command)
            # quiet mode still reports the error
            print(message, file=sys.stderr)
            return EXIT_ERROR
        run_logger.end_operation(operation_id, operation_type, seed=getattr(args, 'seed', None))

    print(path)
    return code


if __name__ == "__main__":
    sys.exit(main())
