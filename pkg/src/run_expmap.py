"""
Exponential-map grid command
Samples exp^{nh}_q (kinetic systems) or exp^{nh,e}_q (with --energy) over
direction x radius cells
"""
import sys

from colorama import Fore, Style, init

from advanced.expmap import exp_grid, unit_directions
from base_runner import BaseRunner, error_line, exit_code_for
from logger import logger
from validator import ValidationError, Validator

# Initialize colorama
init(autoreset=True)


class ExpMapRunner(BaseRunner):
    """Runner for the expmap command"""

    command = 'expmap'

    def __init__(self, run_config):
        """
        Raises:
            ValidationError: If the run sets v0, y0 or a final time other than 1
        """
        if run_config.v0 is not None or run_config.y0 is not None:
            raise ValidationError("expmap takes directions and radii, not v0 / y0")
        if run_config.t_end != 1.0:
            raise ValidationError(f"expmap always evaluates at time 1, got t_end={run_config.t_end}")
        super().__init__(run_config)

    def directions(self):
        """Configured frame-coefficient directions, or evenly spread unit ones"""
        if self.config.directions:
            return [
                Validator.validate_vector(d, self.sys.m, f"direction {k}")
                for k, d in enumerate(self.config.directions)
            ]
        return unit_directions(self.sys, self.q0, self.config.num_directions, self.config.seed)

    def sample(self):
        try:
            return exp_grid(
                self.sys,
                self.q0,
                self.directions(),
                self.config.radii,
                e=self.config.energy,
                opts=self.opts,
                workers=self.config.workers,
            )
        except Exception as e:
            logger.log_error_trace(e, f"Exponential map grid on {self.sys.tag} failed")
            raise

    def run(self):
        grid = self.sample()
        self.write_output(grid.to_csv() if self.config.format == 'csv' else grid.to_json())
        self.print_summary(f"Exponential map of {self.sys.tag}", [
            ['Map', 'exp^(nh)' if grid.e is None else f"exp^(nh,e), e={grid.e}"],
            ['Directions', len(grid.directions)],
            ['Radii', len(grid.radii)],
            ['Points', len(grid.rows)],
            ['Failures', len(grid.failures)],
        ])
        return grid


def main(argv=None):
    """CLI entry point for exponential-map grids"""
    from main import build_parser, config_from_args

    parser = build_parser()
    args = parser.parse_args(['expmap'] + list(sys.argv[1:] if argv is None else argv))
    try:
        ExpMapRunner(config_from_args(args)).run()
    except KeyboardInterrupt:
        print(f"\n{Fore.YELLOW}Grid cancelled by user{Style.RESET_ALL}", file=sys.stderr)
        sys.exit(130)
    except Exception as e:
        print(error_line(e), file=sys.stderr)
        sys.exit(exit_code_for(e))


if __name__ == "__main__":
    main()
