"""
Nonholonomic exponential maps
Kinetic and energy-e maps, grids over star-shaped sets, the differential at
zero, and the closed-form inverse and Gauss-metric checks of the disk
"""
import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from advanced.maupertuis import jacobi_momenta_from_velocity
from config import Config
from dynamics import (
    AdaptedState,
    IntegratorOptions,
    PhaseField,
    hill_gap,
    integrate,
    momenta_from_velocity,
)
from errors import BallExceeded, NotKinetic, RestrictedDomain, SimulationError
from geometry import (
    SystemDefinition,
    frame_at,
    frame_coefficients,
    g_norm,
    gram_at,
    is_constant_potential,
)
from logger import logger
from systems import DISK_HARMONIC, DISK_LINEAR, DISK_NAMES


# Exponential maps =====================================================================

def _require_kinetic(sys, q):
    if not is_constant_potential(sys, q):
        raise NotKinetic(f"{sys.tag} has a nonconstant potential; use exp_nh_mech or kinetic_part")


def exp_nh(sys: SystemDefinition, q, v, t=1.0, opts: Optional[IntegratorOptions] = None):
    """
    Endpoint at time t of the kinetic nonholonomic trajectory from (q, v)

    Raises:
        NotKinetic: If the potential is not constant
        NotInDistribution: If v is not in D_q
    """
    q = np.asarray(q, dtype=float)
    _require_kinetic(sys, q)
    p = momenta_from_velocity(sys, q, v)
    if not np.any(p) or t == 0.0:
        return q.copy()
    traj = integrate(PhaseField.mechanical(sys), AdaptedState(0.0, q, p), float(t), opts)
    return traj.final.q


def ball_radius(sys, e, q, eps=None):
    """sqrt(2 eps / (e - V(q))), the radius of the ball the energy-e map is defined on"""
    eps = Config.BALL_EPS if eps is None else eps
    return math.sqrt(2.0 * eps / hill_gap(sys, e, q))


def exp_nh_mech(sys: SystemDefinition, e, q, v, opts: Optional[IntegratorOptions] = None,
                eps=None, t=1.0):
    """
    exp^{nh,e}_q(v): time-1 endpoint of the Jacobi-kinetic flow from v

    A velocity outside the ball of radius sqrt(2 eps / (e - V(q))) is logged
    as BallExceeded and still evaluated.
    """
    q = np.asarray(q, dtype=float)
    radius = ball_radius(sys, e, q, eps)
    norm = g_norm(sys, q, v)
    if norm > radius:
        logger.warning(
            f"{BallExceeded.code}: |v|_g = {norm:.6g} exceeds the ball radius {radius:.6g} "
            f"of exp^(nh,e) at q={q.tolist()}"
        )
    p = jacobi_momenta_from_velocity(sys, e, q, v)
    if not np.any(p) or t == 0.0:
        return q.copy()
    traj = integrate(PhaseField.jacobi(sys, e), AdaptedState(0.0, q, p), float(t), opts)
    return traj.final.q


def mechanical_exp(sys: SystemDefinition, q, v, opts: Optional[IntegratorOptions] = None, t=1.0):
    """Endpoint at time t of the mechanical trajectory from (q, v)"""
    q = np.asarray(q, dtype=float)
    p = momenta_from_velocity(sys, q, v)
    traj = integrate(PhaseField.mechanical(sys), AdaptedState(0.0, q, p), float(t), opts)
    return traj.final.q


def _exp_for(sys, q, e, opts):
    if e is None:
        _require_kinetic(sys, q)
        return lambda v: exp_nh(sys, q, v, 1.0, opts)
    return lambda v: exp_nh_mech(sys, e, q, v, opts)


def differential_at_zero(sys: SystemDefinition, q, e=None, delta=1e-4,
                         opts: Optional[IntegratorOptions] = None):
    """
    Central differences of the exponential map at 0 along the frame directions,
    expressed in the frame basis

    Returns:
        m x m deviation from the identity matrix
    """
    q = np.asarray(q, dtype=float)
    exp_map = _exp_for(sys, q, e, opts)
    X = frame_at(sys, q)
    columns = []
    for a in range(sys.m):
        step = delta * X[:, a]
        derivative = (exp_map(step) - exp_map(-step)) / (2.0 * delta)
        columns.append(frame_coefficients(sys, q, derivative))
    return np.column_stack(columns) - np.eye(sys.m)


# Grids ================================================================================

@dataclass
class ExpGrid:
    """Exponential-map image over directions x radii, direction-major"""

    q: list
    e: Optional[float]
    directions: list
    radii: list
    rows: list = field(default_factory=list)         # (direction index, radius, endpoint)
    failures: list = field(default_factory=list)     # (direction index, radius, reason)

    @property
    def image(self):
        return np.array([row[2] for row in self.rows])

    def header(self):
        return ['direction', 'radius'] + [f"q{i + 1}" for i in range(len(self.q))]

    def to_csv(self):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(self.header())
        for index, radius, point in self.rows:
            writer.writerow([index, repr(float(radius))] + [repr(float(c)) for c in point])
        return buffer.getvalue()

    def to_dict(self):
        return {
            'q': self.q,
            'e': self.e,
            'directions': self.directions,
            'radii': self.radii,
            'rows': [
                {'direction': index, 'radius': radius, 'point': list(point)}
                for index, radius, point in self.rows
            ],
            'failures': [
                {'direction': index, 'radius': radius, 'error': reason}
                for index, radius, reason in self.failures
            ],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def unit_directions(sys, q, count, seed=0):
    """
    g-unit frame-coefficient directions: evenly spaced angles when m = 2,
    seeded Gaussian samples otherwise
    """
    gram, _ = gram_at(sys, q)
    if sys.m == 2:
        angles = 2.0 * math.pi * np.arange(count) / count
        raw = np.column_stack([np.cos(angles), np.sin(angles)])
    else:
        raw = np.random.default_rng(seed).standard_normal((count, sys.m))
    return [y / math.sqrt(float(y @ gram @ y)) for y in raw]


def exp_grid(sys: SystemDefinition, q, directions: Sequence, radii: Sequence, e=None,
             opts: Optional[IntegratorOptions] = None, workers=1) -> ExpGrid:
    """
    Sample the exponential map over direction x radius cells

    Directions are frame coefficients, unit in g. A failing cell is recorded
    and the run continues.
    """
    q = np.asarray(q, dtype=float)
    X = frame_at(sys, q)
    exp_map = _exp_for(sys, q, e, opts)
    cells = [(k, float(r)) for k in range(len(directions)) for r in radii]

    def evaluate(cell):
        k, r = cell
        if r == 0.0:
            return k, r, q.copy(), None
        try:
            return k, r, exp_map(X @ (r * np.asarray(directions[k], dtype=float))), None
        except SimulationError as err:
            logger.warning(f"exp grid cell (direction {k}, radius {r}) failed: {err}")
            return k, r, None, f"{err.code}: {err}"

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, cells))
    else:
        results = [evaluate(cell) for cell in cells]

    grid = ExpGrid(
        q=q.tolist(),
        e=None if e is None else float(e),
        directions=[np.asarray(d, dtype=float).tolist() for d in directions],
        radii=[float(r) for r in radii],
    )
    for k, r, point, reason in results:
        if reason is None:
            grid.rows.append((k, r, np.asarray(point).tolist()))
        else:
            grid.failures.append((k, r, reason))
    logger.info(f"exp grid on {sys.tag}: {len(grid.rows)} points, {len(grid.failures)} failures")
    return grid


# Disk closed forms ====================================================================

def disk_inverse_exp(name, q0, point):
    """
    Closed-form inverse R^{nh}_{q0} of the time-1 mechanical flow map of the disk

    Returns:
        (Omega, omega) frame coefficients of the initial velocity

    Raises:
        RestrictedDomain: Outside the disk examples
    """
    if name not in DISK_NAMES:
        raise RestrictedDomain(f"No closed-form inverse exponential map for {name}")
    theta0, phi0 = float(q0[2]), float(q0[3])
    theta, phi = float(point[2]), float(point[3])
    if name == DISK_HARMONIC:
        return theta - theta0, (phi - phi0 * math.cos(1.0)) / math.sin(1.0)
    if name == DISK_LINEAR:
        return theta - theta0, phi - phi0 + 0.5
    return theta - theta0, phi - phi0


@dataclass
class GaussReport:
    """Flat Gauss metric and radial straight-line checks on the disk"""

    name: str
    gauss_defect: float
    max_line_deviation: float
    directions: int

    def to_dict(self):
        return {
            'system': self.name,
            'gauss_defect': self.gauss_defect,
            'max_line_deviation': self.max_line_deviation,
            'directions': self.directions,
        }


def flat_gauss_metric(y):
    """G_0 = dOmega (x) dOmega + domega (x) domega, the same at every point of D_q"""
    return np.eye(2)


def gauss_pullback_check(sys, name, q0, velocities, t_values=(0.25, 0.5, 0.75, 1.0),
                         opts: Optional[IntegratorOptions] = None) -> GaussReport:
    """
    Check that g^{nh}_q, the push-forward of the flat metric through R^{nh},
    makes radial trajectories straight lines through the origin

    Args:
        sys: A disk system
        name: Its builtin name, selecting the closed-form inverse
        q0: Base point
        velocities: (Omega, omega) pairs
        t_values: Radial parameters sampled on each ray
    """
    if name not in DISK_NAMES:
        raise RestrictedDomain(f"Gauss metric check needs a closed-form inverse; got {name}")
    q0 = np.asarray(q0, dtype=float)
    X = frame_at(sys, q0)

    gauss_defect = 0.0
    line_deviation = 0.0
    for y in velocities:
        y = np.asarray(y, dtype=float)
        # G_0(v)(v, w) = G_0(0)(v, w) for the constant metric
        w = np.array([y[1], -y[0]])
        gauss_defect = max(gauss_defect, abs(y @ flat_gauss_metric(y) @ w - y @ flat_gauss_metric(0 * y) @ w))
        for t in t_values:
            endpoint = mechanical_exp(sys, q0, X @ (t * y), opts)
            image = np.array(disk_inverse_exp(name, q0, endpoint))
            line_deviation = max(line_deviation, float(np.linalg.norm(image - t * y)))

    logger.log_check(f"gauss straight lines {name}", line_deviation, 1e-8, line_deviation <= 1e-8)
    return GaussReport(name, gauss_defect, line_deviation, len(velocities))
