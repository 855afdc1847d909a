"""
Base runner class for simulator commands
Provides system resolution, run validation, output and error mapping
"""
import sys
from pathlib import Path

import numpy as np
from colorama import Fore, Style, init
from tabulate import tabulate

from config import RunConfig
from dynamics import IntegratorOptions
from errors import (
    NotInDistribution,
    NotKinetic,
    SimulationError,
    UnknownSystem,
    ZeroVector,
)
from geometry import frame_vector
from logger import logger
from systems import resolve_system
from validator import Validator, ValidationError

# Initialize colorama
init(autoreset=True)

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

# Input problems: the run never started
INPUT_ERRORS = (ValidationError, UnknownSystem, NotKinetic, NotInDistribution, ZeroVector)


def exit_code_for(error):
    """CLI exit code of an exception raised by a command"""
    if isinstance(error, INPUT_ERRORS):
        return EXIT_INVALID
    return EXIT_NUMERICAL


def error_line(error):
    """Single-line machine-parsable reason: ERROR <Code>: <message>"""
    code = getattr(error, 'code', type(error).__name__)
    message = ' '.join(str(error).split())
    return f"ERROR {code}: {message}"


class BaseRunner:
    """Base command runner with shared run-setup functionality"""

    command = 'base'
    needs_energy = False

    def __init__(self, run_config: RunConfig):
        """
        Initialize the runner

        Args:
            run_config: Parameters of this invocation

        Raises:
            ValidationError: If the configuration is invalid
            UnknownSystem: If the system name is not recognized
        """
        try:
            self.config = run_config.validate(needs_energy=self.needs_energy)
            self.sys = resolve_system(self.config.system)
            self.system_name = self.config.system
            self.opts = IntegratorOptions(
                method=self.config.method,
                step=self.config.step,
                rtol=self.config.tol,
                atol=self.config.tol,
            )
            self.q0 = self._initial_point()
            if self.config.energy is not None:
                Validator.validate_energy(self.config.energy, float(self.sys.potential(self.q0)))
            logger.log_run(self.command, **self.config.to_dict())
        except (ValidationError, SimulationError) as e:
            logger.error(f"Run setup failed: {e}")
            raise

    def _initial_point(self):
        if self.config.q0 is None:
            return np.zeros(self.sys.n)
        return Validator.validate_vector(self.config.q0, self.sys.n, 'q0')

    def initial_velocity(self, required=True):
        """
        Chart velocity from --v0, or from --y0 frame coefficients

        Returns:
            Chart velocity, or None when neither is given and not required
        """
        if self.config.v0 is not None:
            return Validator.validate_vector(self.config.v0, self.sys.n, 'v0')
        if self.config.y0 is not None:
            y = Validator.validate_vector(self.config.y0, self.sys.m, 'y0')
            return frame_vector(self.sys, self.q0, y)
        if required:
            raise ValidationError("An initial velocity is required (--v0 or --y0)")
        return None

    def write_output(self, text):
        """Write machine output to --out, or to stdout"""
        if self.config.out:
            path = Path(self.config.out)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding='utf-8')
            logger.info(f"Wrote {self.command} output to {path}")
        else:
            sys.stdout.write(text)
            if not text.endswith('\n'):
                sys.stdout.write('\n')

    def print_summary(self, title, rows):
        """
        Colored summary table; only shown when machine output goes to a file
        so stdout stays parseable
        """
        if not self.config.out:
            return
        print(f"\n{Fore.YELLOW}{'=' * 60}{Style.RESET_ALL}")
        print(f"{Fore.YELLOW}{title}{Style.RESET_ALL}")
        print(f"{Fore.YELLOW}{'=' * 60}{Style.RESET_ALL}")
        print(tabulate(rows, headers=['Quantity', 'Value'], tablefmt='simple'))
        print(f"{Fore.CYAN}Output:{Style.RESET_ALL} {self.config.out}\n")

    def run(self):
        raise NotImplementedError
