"""
Trajectory simulation command
Integrates the nonholonomic mechanical equations from one initial state
"""
import csv
import io
import json
import sys

import numpy as np
from colorama import Fore, Style, init

from advanced.maupertuis import energy_shell_velocity
from base_runner import BaseRunner, error_line, exit_code_for
from dynamics import (
    AdaptedState,
    PhaseField,
    constraint_residual,
    integrate,
    momenta_from_velocity,
    velocity_from_momenta,
)
from geometry import frame_coefficients
from logger import logger

# Initialize colorama
init(autoreset=True)


class SimulationRunner(BaseRunner):
    """Runner for the simulate command"""

    command = 'simulate'

    def initial_state(self):
        """
        Adapted initial state; with --energy the velocity direction is kept
        and rescaled onto the energy shell
        """
        v = self.initial_velocity(required=False)
        if v is None:
            v = np.zeros(self.sys.n)
        if self.config.energy is not None:
            y = frame_coefficients(self.sys, self.q0, v)
            v = energy_shell_velocity(self.sys, self.config.energy, self.q0, y)
        return AdaptedState(0.0, self.q0, momenta_from_velocity(self.sys, self.q0, v))

    def simulate(self):
        """
        Integrate to t_end

        Returns:
            Trajectory of the mechanical system
        """
        try:
            state0 = self.initial_state()
            return integrate(PhaseField.mechanical(self.sys), state0, self.config.t_end, self.opts)
        except Exception as e:
            logger.log_error_trace(e, f"Simulation of {self.sys.tag} failed")
            raise

    def rows(self, traj):
        """t, q_1..q_n, p_1..p_m, energy, constraint residual per sample"""
        bounds = self.sys.chart_bounds
        for sample, energy in zip(traj.samples, traj.energy_series):
            velocity = velocity_from_momenta(self.sys, sample.q, sample.p)
            residual = constraint_residual(self.sys, sample.q, velocity)
            q = sample.q
            if self.config.wrap_angles and bounds is not None:
                q = bounds.wrap(q)
            yield [sample.t, *q, *sample.p, energy, residual]

    def header(self):
        return (
            ['t']
            + [f"q_{i + 1}" for i in range(self.sys.n)]
            + [f"p_{a + 1}" for a in range(self.sys.m)]
            + ['energy', 'constraint_residual']
        )

    def to_csv(self, traj):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(self.header())
        for row in self.rows(traj):
            writer.writerow([repr(float(value)) for value in row])
        return buffer.getvalue()

    def to_json(self, traj):
        return json.dumps({
            'system': self.sys.tag,
            'integrator': traj.integrator,
            'columns': self.header(),
            'rows': [[float(value) for value in row] for row in self.rows(traj)],
        }, indent=2)

    def run(self):
        traj = self.simulate()
        text = self.to_csv(traj) if self.config.format == 'csv' else self.to_json(traj)
        self.write_output(text)

        energies = np.asarray(traj.energy_series)
        self.print_summary(f"Simulation of {self.sys.tag}", [
            ['Integrator', traj.integrator['method']],
            ['Samples', len(traj.samples)],
            ['Final time', traj.final.t],
            ['Final q', np.array2string(traj.final.q, precision=10)],
            ['Energy drift', float(np.max(np.abs(energies - energies[0])))],
        ])
        return traj


def main(argv=None):
    """CLI entry point for simulations"""
    from main import build_parser, config_from_args

    parser = build_parser()
    args = parser.parse_args(['simulate'] + list(sys.argv[1:] if argv is None else argv))
    try:
        SimulationRunner(config_from_args(args)).run()
    except KeyboardInterrupt:
        print(f"\n{Fore.YELLOW}Simulation cancelled by user{Style.RESET_ALL}", file=sys.stderr)
        sys.exit(130)
    except Exception as e:
        print(error_line(e), file=sys.stderr)
        sys.exit(exit_code_for(e))


if __name__ == "__main__":
    main()
