"""
Maupertuis-Jacobi verification command
Integrates the mechanical and the Jacobi-kinetic trajectory from one
velocity direction and reports their deviation under h
"""
import sys

import numpy as np
from colorama import Fore, Style, init

from advanced.maupertuis import verify_maupertuis
from base_runner import (
    EXIT_FAILED_CHECK,
    EXIT_OK,
    BaseRunner,
    error_line,
    exit_code_for,
)
from geometry import frame_at
from logger import logger

# Initialize colorama
init(autoreset=True)


class VerificationRunner(BaseRunner):
    """Runner for the verify-maupertuis command"""

    command = 'verify-maupertuis'
    needs_energy = True

    def direction(self):
        """The given velocity, or the first frame field at q0 by default"""
        v = self.initial_velocity(required=False)
        if v is None:
            v = frame_at(self.sys, self.q0)[:, 0]
        return v

    def verify(self):
        """
        Run both legs over s in [0, t_end]

        Returns:
            VerificationReport
        """
        try:
            return verify_maupertuis(
                self.sys,
                self.config.energy,
                self.q0,
                self.direction(),
                s_end=self.config.t_end,
                opts=self.opts,
                tol=self.config.verify_tol,
                samples=self.config.samples,
            )
        except Exception as e:
            logger.log_error_trace(e, f"Verification on {self.sys.tag} failed")
            raise

    def run(self):
        """
        Returns:
            Exit code: 0 when the check passes, 1 otherwise
        """
        report = self.verify()
        self.write_output(report.to_json())

        status = f"{Fore.GREEN}PASS" if report.passed else f"{Fore.RED}FAIL"
        self.print_summary(f"Maupertuis-Jacobi check on {self.sys.tag}", [
            ['Energy', report.e],
            ['Max position deviation', report.max_position_deviation],
            ['Tolerance', report.tolerance],
            ['Max h residual', report.max_h_residual],
            ['h(s_end)', report.h_samples[-1]],
            ['Mechanical endpoint', np.array2string(np.array(report.mechanical_endpoint), precision=10)],
            ['Result', f"{status}{Style.RESET_ALL}"],
        ])
        if not report.passed:
            print(
                f"FAIL VerificationFailed: deviation {report.max_position_deviation!r} "
                f"exceeds {report.tolerance!r}",
                file=sys.stderr,
            )
            return EXIT_FAILED_CHECK
        return EXIT_OK


def main(argv=None):
    """CLI entry point for Maupertuis-Jacobi verification"""
    from main import build_parser, config_from_args

    parser = build_parser()
    args = parser.parse_args(['verify-maupertuis'] + list(sys.argv[1:] if argv is None else argv))
    try:
        sys.exit(VerificationRunner(config_from_args(args)).run())
    except KeyboardInterrupt:
        print(f"\n{Fore.YELLOW}Verification cancelled by user{Style.RESET_ALL}", file=sys.stderr)
        sys.exit(130)
    except Exception as e:
        print(error_line(e), file=sys.stderr)
        sys.exit(exit_code_for(e))


if __name__ == "__main__":
    main()
