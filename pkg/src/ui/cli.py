"""
Command-Line Interface
argparse front end: builds a RunSpec from the command line and hands it to the orchestrator
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from src.core.errors import DomainError, exit_code_for
from src.di.container import DIContainer, get_container
from src.services.analysis_orchestrator import (
    ALLOCATION_METHODS,
    COMMANDS,
    SWEEP_PARAMETERS,
    SWEEP_QUANTITIES,
    RunSpec,
    error_line,
)
from src.services.figure_service import FigureService

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

# Flags copied into RunSpec.parameters (argparse dest -> parameter key)
PARAMETER_FLAGS = {
    "u": "u",
    "alpha": "alpha",
    "horizon": "horizon",
    "method": "method",
    "paths": "paths",
    "seed": "seed",
    "workers": "workers",
    "steps": "steps",
    "bandwidth": "bandwidth",
    "bridge": "bridge",
    "grid_points": "grid_points",
    "figures": "figures",
    "sweep_param": "sweep_param",
    "start": "start",
    "stop": "stop",
    "points": "points",
    "spacing": "spacing",
    "quantity": "quantity",
}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as DomainError instead of exiting"""

    def error(self, message):
        raise DomainError(message)


def _common_flags() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--model', help='Path to the JSON model file')
    common.add_argument('--out', default=None,
                        help="Output CSV path ('-' or omitted for stdout; a directory for figures)")
    common.add_argument('--horizon', default='inf', help="Time horizon: 'inf' or a positive number")
    common.add_argument('--u', type=float, default=None, help='Initial capital')
    common.add_argument('--alpha', type=float, default=None, help='Ruin-probability level in (0, 1)')
    common.add_argument('--method', choices=ALLOCATION_METHODS, default=None, help='Allocation method')

    sim = common.add_argument_group('simulation')
    sim.add_argument('--paths', type=int, default=None, help='Monte Carlo paths')
    sim.add_argument('--seed', type=int, default=None, help='Root seed')
    sim.add_argument('--workers', type=int, default=None, help='Worker threads')
    sim.add_argument('--steps', type=int, default=None, help='Euler steps per unit time')
    sim.add_argument('--bandwidth', type=float, default=None,
                     help='Conditioning window for sup-location estimates (default 5%% of u)')
    sim.add_argument('--no-bridge', dest='bridge', action='store_const', const=False, default=None,
                     help='Disable the Brownian-bridge crossing correction')

    sweep = common.add_argument_group('sweep')
    sweep.add_argument('--sweep-param', choices=SWEEP_PARAMETERS, default=None, help='Parameter to vary')
    sweep.add_argument('--quantity', choices=SWEEP_QUANTITIES, default=None, help='Quantity to compute')
    sweep.add_argument('--start', type=float, default=None, help='First grid value')
    sweep.add_argument('--stop', type=float, default=None, help='Last grid value')
    sweep.add_argument('--points', type=int, default=None, help='Number of grid points (default 50)')
    sweep.add_argument('--spacing', choices=('lin', 'log'), default=None, help='Grid spacing')

    figures = common.add_argument_group('figures')
    figures.add_argument('--figures', nargs='+', default=None,
                         help=f"Subset of figure tables ({', '.join(FigureService.UNITS)})")
    figures.add_argument('--grid-points', type=int, default=None,
                         help='Override the alpha, u and T grid sizes')

    common.add_argument('--log-level', choices=LOG_LEVELS, default='WARNING', help='Logging level (stderr)')
    common.add_argument('--run-log', default=None, help='Directory for the JSON run audit log')
    return common


def build_parser() -> argparse.ArgumentParser:
    """Top-level parser with one subcommand per analysis"""
    parser = _Parser(
        prog='ruinalloc',
        description='Ruin probabilities, dynamic VaR and capital allocation for multivariate Levy risk models'
    )
    subparsers = parser.add_subparsers(dest='command', metavar='command', parser_class=_Parser)
    subparsers.required = True
    common = _common_flags()
    helps = {
        "ruin": "Ruin probability of the aggregate",
        "var": "Dynamic value-at-risk",
        "allocate": "Capital allocation (k, kbar, gvar or asymptotic)",
        "sweep": "One-parameter grid of a quantity",
        "figures": "Tables behind the worked-example figures",
        "verify": "Run the closed-form vs simulation cross-checks",
    }
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=helps[command])
    return parser


def parse_run_spec(argv: Optional[List[str]] = None) -> RunSpec:
    """
    Parse command-line arguments into a RunSpec.

    Raises:
        DomainError: unknown flags or malformed values
    """
    args = build_parser().parse_args(argv)
    parameters = {key: getattr(args, dest) for dest, key in PARAMETER_FLAGS.items()}
    return RunSpec(command=args.command, model_path=args.model, parameters=parameters, output_path=args.out)


def _global_options(argv: List[str]) -> argparse.Namespace:
    """--log-level and --run-log, readable even when the rest of the command line is invalid"""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('--log-level', default='WARNING')
    pre.add_argument('--run-log', default=None)
    options, _ = pre.parse_known_args(argv)
    return options


def main(argv: Optional[List[str]] = None, container: Optional[DIContainer] = None) -> int:
    """
    CLI entry point.

    Returns:
        Process exit code (0 success, 1 invalid input, 2 numerical failure)
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    options = _global_options(argv)
    level = options.log_level if options.log_level in LOG_LEVELS else 'WARNING'
    logging.basicConfig(level=getattr(logging, level), stream=sys.stderr,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    container = container or get_container()
    if options.run_log:
        container.run_log_path = Path(options.run_log)
        container.clear()

    try:
        spec = parse_run_spec(argv)
    except DomainError as e:
        code = exit_code_for(e)
        (container.error_stream or sys.stderr).write(error_line(e, code))
        return code

    logger.info(f"Running {spec.command} with model {spec.model_path}")
    return container.get_analysis_orchestrator().run(spec)
