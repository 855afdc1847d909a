"""
Main CLI interface for the nonholonomic Maupertuis-Jacobi simulator
Sub-commands: simulate, verify-maupertuis, expmap, list-systems
"""
import argparse
import json
import sys

from colorama import Fore, Style, init

from base_runner import EXIT_INVALID, EXIT_OK, error_line, exit_code_for
from config import Config, RunConfig
from logger import logger
from systems import list_systems
from validator import ValidationError

# Initialize colorama
init(autoreset=True)


class SingleLineParser(argparse.ArgumentParser):
    """Argument parser whose usage errors are one machine-parsable line"""

    def error(self, message):
        print(error_line(ValidationError(message)), file=sys.stderr)
        sys.exit(EXIT_INVALID)


def _vector(text):
    """'1,0.5' -> [1.0, 0.5]"""
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _add_run_arguments(parser, trajectory=True):
    parser.add_argument('--config', help='JSON run configuration; flags override its values')
    parser.add_argument('--system', help='Builtin system name or path to a system-definition file')
    parser.add_argument('--energy', type=float, help='Energy level e')
    parser.add_argument('--q0', type=float, nargs='+', help='Initial chart point (default: origin)')
    if trajectory:
        velocity = parser.add_mutually_exclusive_group()
        velocity.add_argument('--v0', type=float, nargs='+', help='Initial chart velocity in D_q0')
        velocity.add_argument('--y0', type=float, nargs='+',
                              help='Initial velocity as frame coefficients, e.g. (Omega, omega) for the disk')
        parser.add_argument('--t-end', dest='t_end', type=float, help='Final time (s_end for verify-maupertuis)')
    parser.add_argument('--method', choices=['rk4', 'rkf45'], help='Integrator')
    parser.add_argument('--step', type=float, help='rk4 step size')
    parser.add_argument('--tol', type=float, help='rkf45 absolute and relative tolerance')
    parser.add_argument('--out', help='Output file (default: stdout)')
    parser.add_argument('--format', choices=['csv', 'json'], help='Output format')
    parser.add_argument('--seed', type=int, help='Seed for randomized direction sweeps')


def build_parser():
    """Argument parser with one sub-command per operation"""
    parser = SingleLineParser(
        prog='nhsim',
        description='Nonholonomic mechanics and the Maupertuis-Jacobi principle',
    )
    sub = parser.add_subparsers(dest='command', parser_class=SingleLineParser)
    sub.required = True

    simulate = sub.add_parser('simulate', help='Integrate the mechanical equations')
    _add_run_arguments(simulate)
    simulate.add_argument('--no-wrap', dest='wrap_angles', action='store_const', const=False,
                          help='Do not wrap periodic coordinates into (-pi, pi]')

    verify = sub.add_parser('verify-maupertuis',
                            help='Compare a mechanical trajectory with its Jacobi-kinetic reparametrization')
    _add_run_arguments(verify)
    verify.add_argument('--verify-tol', dest='verify_tol', type=float,
                        help='Pass threshold on the position deviation')
    verify.add_argument('--samples', type=int, help='Number of s-grid points')

    expmap = sub.add_parser('expmap', help='Sample the nonholonomic exponential map')
    # exp maps always evaluate at time 1 along the given directions
    _add_run_arguments(expmap, trajectory=False)
    expmap.add_argument('--directions', type=_vector, nargs='+',
                        help='Frame-coefficient directions, each comma separated (unit in g)')
    expmap.add_argument('--num-directions', dest='num_directions', type=int,
                        help='Number of generated directions when --directions is absent')
    expmap.add_argument('--radii', type=float, nargs='+', help='Ascending non-negative radii')
    expmap.add_argument('--workers', type=int, help='Thread pool size for grid cells')

    sub.add_parser('list-systems', help='Print builtin system metadata as JSON')
    return parser


def config_from_args(args):
    """
    RunConfig from the optional --config file overlaid by the given flags

    Raises:
        ValidationError: If the config file is unreadable or has unknown keys
    """
    base = RunConfig.from_file(args.config) if getattr(args, 'config', None) else RunConfig()
    overrides = {
        name: value for name, value in vars(args).items()
        if name not in ('command', 'config') and value is not None
    }
    return base.merged(overrides)


def run_list_systems():
    """Write builtin system metadata to stdout"""
    sys.stdout.write(json.dumps(list_systems(), indent=2) + '\n')
    return EXIT_OK


def run_command(args):
    """Dispatch a parsed command line; returns the exit code"""
    if args.command == 'list-systems':
        return run_list_systems()

    config = config_from_args(args)
    if args.command == 'simulate':
        from run_simulation import SimulationRunner
        SimulationRunner(config).run()
        return EXIT_OK
    if args.command == 'verify-maupertuis':
        from run_verification import VerificationRunner
        return VerificationRunner(config).run()
    from run_expmap import ExpMapRunner
    ExpMapRunner(config).run()
    return EXIT_OK


def main(argv=None):
    """
    CLI entry point

    Returns:
        0 on success, 1 on a failed verification, 2 on invalid input,
        3 on a numerical failure
    """
    args = build_parser().parse_args(argv)
    try:
        Config.validate()
        return run_command(args)
    except KeyboardInterrupt:
        print(f"\n{Fore.YELLOW}Operation cancelled by user{Style.RESET_ALL}", file=sys.stderr)
        return 130
    except ValueError as e:
        # Config.validate and stray numeric conversions
        logger.log_error_trace(e, f"{args.command} aborted")
        print(error_line(e), file=sys.stderr)
        return EXIT_INVALID
    except Exception as e:
        logger.log_error_trace(e, f"{args.command} aborted")
        print(error_line(e), file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
