"""
Nonholonomic Maupertuis-Jacobi principle
Jacobi metric, energy-shell projections, the reparametrization h and the
numerical checks that mechanical motion at energy e is reparametrized
Jacobi-kinetic motion
"""
import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import json
import math
from dataclasses import dataclass, replace, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_simpson

from config import Config
from dynamics import (
    AdaptedState,
    IntegratorOptions,
    constraint_residual,
    PhaseField,
    hill_gap,
    integrate,
    jacobi_field,
    mechanical_field,
    momenta_from_velocity,
)
from errors import NotInDistribution, NotOnShell, NotOnSphere, SimulationError, ZeroVector
from geometry import (
    SystemDefinition,
    frame_coefficients,
    frame_vector,
    g_norm,
    gram_at,
    metric_at,
    metric_derivative_at,
    potential_differential_at,
)
from integrators import rk4_step
from logger import logger
from systems import builtin, kinetic_disk_accelerations


# Jacobi metric ========================================================================

def jacobi_system(sys: SystemDefinition, e) -> SystemDefinition:
    """
    The kinetic system (g_e = (e - V) g, D) on the Hill region U_e

    HillBoundary surfaces when the metric is evaluated outside U_e.
    """
    e = float(e)
    zero = np.zeros(sys.n)

    def metric(q):
        return hill_gap(sys, e, q) * metric_at(sys, q)

    def metric_derivative(q):
        gap = hill_gap(sys, e, q)
        dV = potential_differential_at(sys, q)
        return gap * metric_derivative_at(sys, q) - np.einsum('k,ij->kij', dV, metric_at(sys, q))

    return replace(
        sys,
        metric=metric,
        metric_derivative=metric_derivative,
        potential=lambda q: 0.0,
        potential_gradient=lambda q: zero,
        tag=f"{sys.tag}/jacobi(e={e!r})",
        constant_potential=True,
    )


def jacobi_momenta_from_velocity(sys, e, q, v, tol=None):
    """Momenta of v for the Jacobi metric: p = (e - V) g_ab y^b"""
    return hill_gap(sys, e, q) * momenta_from_velocity(sys, q, v, tol)


# Energy-shell projections =============================================================

def _direction(sys, q, v, tol=None):
    v = np.asarray(v, dtype=float)
    norm = g_norm(sys, q, v)
    if norm == 0.0:
        raise ZeroVector(f"Velocity must be nonzero at q={np.asarray(q).tolist()}")
    tol = Config.CONSTRAINT_TOL if tol is None else tol
    residual = constraint_residual(sys, q, v)
    if residual > tol * np.linalg.norm(v):
        raise NotInDistribution(
            f"Velocity {v.tolist()} is not in D_q (residual {residual:.3e})"
        )
    return v / norm


def project_P(sys, e, q, v, tol=None):
    """Rescale v onto the mechanical sphere of radius sqrt(2 (e - V(q)))"""
    unit = _direction(sys, q, v, tol)
    return math.sqrt(2.0 * hill_gap(sys, e, q)) * unit


def project_Q(sys, e, q, v, tol=None):
    """Rescale v onto the kinetic sphere of radius sqrt(2 / (e - V(q))), where H_e = 1"""
    unit = _direction(sys, q, v, tol)
    return math.sqrt(2.0 / hill_gap(sys, e, q)) * unit


def psi(sys, e, q, v, tol=None):
    """
    Map the P-sphere onto the Q-sphere, v -> v / (e - V(q))

    Raises:
        NotOnSphere: If v is not on the P-sphere
    """
    tol = Config.SPHERE_TOL if tol is None else tol
    gap = hill_gap(sys, e, q)
    radius = math.sqrt(2.0 * gap)
    norm = g_norm(sys, q, v)
    if abs(norm - radius) > tol * max(1.0, radius):
        raise NotOnSphere(f"|v|_g = {norm!r} differs from the P-sphere radius {radius!r}")
    return np.asarray(v, dtype=float) / gap


def reparametrization_factor(sys, e, q, v):
    """lambda(v) = sqrt((e - V(q)) / 2) |v|_g, so that v = lambda(v) Q_q(v)"""
    return math.sqrt(0.5 * hill_gap(sys, e, q)) * g_norm(sys, q, v)


def energy_shell_velocity(sys, e, q, y):
    """
    Chart velocity along frame coefficients y with energy exactly e

    Raises:
        ZeroVector: If y vanishes
    """
    q = np.asarray(q, dtype=float)
    gram, _ = gram_at(sys, q)
    y = np.asarray(y, dtype=float)
    norm2 = float(y @ gram @ y)
    if norm2 == 0.0:
        raise ZeroVector("Frame coefficients must be nonzero to reach the energy shell")
    scale = math.sqrt(2.0 * hill_gap(sys, e, q) / norm2)
    return frame_vector(sys, q, scale * y)


# Energy shell =========================================================================

@dataclass(frozen=True)
class EnergyShellPoint:
    """A covector (q, p) on S_e*: 1/2 g^{ab} p_a p_b = e - V(q)"""

    q: np.ndarray
    p: np.ndarray

    @classmethod
    def checked(cls, sys, e, q, p, tol=None):
        """
        Raises:
            NotOnShell: If the shell defect exceeds tol
        """
        tol = Config.SHELL_TOL if tol is None else tol
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        defect = shell_defect(sys, e, AdaptedState(0.0, q, p))
        if defect > tol * max(1.0, e - float(sys.potential(q))):
            raise NotOnShell(f"Shell defect {defect:.3e} exceeds {tol:.1e}")
        return cls(q, p)

    @classmethod
    def from_frame_direction(cls, sys, e, q, y):
        """Scale the covector g_ab y^b onto S_e*"""
        q = np.asarray(q, dtype=float)
        gap = hill_gap(sys, e, q)
        gram, gram_inv = gram_at(sys, q)
        p = gram @ np.asarray(y, dtype=float)
        norm2 = float(p @ gram_inv @ p)
        if norm2 == 0.0:
            raise ZeroVector("Shell direction must be nonzero")
        return cls.checked(sys, e, q, p * math.sqrt(2.0 * gap / norm2))

    def state(self, t=0.0):
        return AdaptedState(t, self.q, self.p)


def shell_defect(sys, e, state: AdaptedState) -> float:
    """|1/2 g^{ab} p_a p_b - (e - V(q))|"""
    _, gram_inv = gram_at(sys, state.q)
    return abs(0.5 * float(state.p @ gram_inv @ state.p) - (e - float(sys.potential(state.q))))


def reeb_ratio_check(sys, e, shell_pt: EnergyShellPoint) -> float:
    """
    Relative defect of (e - V) X_{g_e} against X_{(g,V,D)} on S_e*, measured
    in the full (qdot, pdot) vector
    """
    state = shell_pt.state()
    gap = hill_gap(sys, e, state.q)
    q_kin, p_kin = jacobi_field(sys, e, state)
    q_mech, p_mech = mechanical_field(sys, e, state)
    kinetic = gap * np.concatenate([q_kin, p_kin])
    mechanical = np.concatenate([q_mech, p_mech])
    scale = np.linalg.norm(mechanical)
    return float(np.linalg.norm(kinetic - mechanical) / (scale if scale > 0 else 1.0))


def contact_pairing(sys, e, shell_pt: EnergyShellPoint):
    """
    Half the momentum paired with the base velocity of the Jacobi-kinetic
    and the mechanical field

    Returns:
        (kinetic pairing, equal to 1; mechanical pairing, equal to e - V(q))
    """
    state = shell_pt.state()
    hill_gap(sys, e, state.q)
    q_kin, _ = jacobi_field(sys, e, state)
    q_mech, _ = mechanical_field(sys, e, state)
    kinetic = 0.5 * float(state.p @ frame_coefficients(sys, state.q, q_kin))
    mechanical = 0.5 * float(state.p @ frame_coefficients(sys, state.q, q_mech))
    return kinetic, mechanical


# Reparametrization ====================================================================

def _gaps_along(sys, e, positions):
    return np.array([hill_gap(sys, e, q) for q in positions])


def reparametrization(sys, e, mech_traj) -> np.ndarray:
    """
    h(s) = int_0^s (e - V(c(u))) du by composite Simpson on the samples of
    the mechanical trajectory

    Raises:
        HillBoundary: If some sample leaves the Hill region
    """
    times = mech_traj.times()
    gaps = _gaps_along(sys, e, mech_traj.positions())
    return cumulative_simpson(gaps, x=times - times[0], initial=0.0)


def inverse_reparametrization(sys, e, kin_traj) -> np.ndarray:
    """
    h^{-1} along a Jacobi-kinetic trajectory: ds/dh = 1 / (e - V(c_kinetic(h)))
    """
    times = kin_traj.times()
    gaps = _gaps_along(sys, e, kin_traj.positions())
    return cumulative_simpson(1.0 / gaps, x=times - times[0], initial=0.0)


def _derivative(values, times):
    """Fourth-order finite-difference derivative on a uniform grid"""
    values = np.asarray(values, dtype=float)
    steps = np.diff(times)
    if len(values) < 5 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        return np.gradient(values, times, edge_order=2)
    ds = steps[0]
    d = np.empty_like(values)
    d[2:-2] = (values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1] - values[4:]) / (12.0 * ds)
    d[0] = (-25 * values[0] + 48 * values[1] - 36 * values[2] + 16 * values[3] - 3 * values[4]) / (12.0 * ds)
    d[1] = (-3 * values[0] - 10 * values[1] + 18 * values[2] - 6 * values[3] + values[4]) / (12.0 * ds)
    d[-1] = (25 * values[-1] - 48 * values[-2] + 36 * values[-3] - 16 * values[-4] + 3 * values[-5]) / (12.0 * ds)
    d[-2] = (3 * values[-1] + 10 * values[-2] - 18 * values[-3] + 6 * values[-4] - values[-5]) / (12.0 * ds)
    return d


def h_residual(sys, e, times, positions, h) -> float:
    """sup |dh/ds - (e - V(c(s)))| on the sample grid"""
    gaps = _gaps_along(sys, e, positions)
    return float(np.max(np.abs(_derivative(h, np.asarray(times)) - gaps)))


# Verification =========================================================================

@dataclass
class VerificationReport:
    """Mechanical trajectory against its h-reparametrized Jacobi-kinetic counterpart"""

    e: float
    v_q: list
    s_grid: list
    max_position_deviation: float
    max_h_residual: float
    h_samples: list
    passed: bool
    tolerance: float
    system_tag: str = ''
    integrator: dict = field(default_factory=dict)
    mechanical_endpoint: list = field(default_factory=list)
    kinetic_endpoint: list = field(default_factory=list)

    def to_dict(self):
        return {
            'system': self.system_tag,
            'e': self.e,
            'v_q': self.v_q,
            's_grid': self.s_grid,
            'max_position_deviation': self.max_position_deviation,
            'max_h_residual': self.max_h_residual,
            'h_samples': self.h_samples,
            'pass': self.passed,
            'tolerance': self.tolerance,
            'integrator': self.integrator,
            'mechanical_endpoint': self.mechanical_endpoint,
            'kinetic_endpoint': self.kinetic_endpoint,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def _grid_indices(times, grid):
    indices = np.searchsorted(times, grid)
    indices = np.clip(indices, 0, len(times) - 1)
    for k, (idx, s) in enumerate(zip(indices, grid)):
        if idx > 0 and abs(times[idx - 1] - s) < abs(times[idx] - s):
            indices[k] = idx - 1
    return indices


def verify_maupertuis(sys, e, q, v, s_end=1.0, opts: Optional[IntegratorOptions] = None,
                      tol=None, samples=11,
                      mechanical_oracle: Optional[Callable[[float], np.ndarray]] = None
                      ) -> VerificationReport:
    """
    Compare c_{P(v)}(s) with c_{Q(v)}(h(s)) on an s-grid

    Args:
        sys: Mechanical system
        e: Energy level (e > V(q))
        q: Base point
        v: Nonzero velocity in D_q (only its direction matters)
        s_end: Length of the mechanical time interval
        opts: Integrator options shared by both legs
        tol: Pass threshold on the sup position deviation
        samples: Number of s-grid points
        mechanical_oracle: Closed-form s -> c(s) replacing the integrated mechanical leg

    Raises:
        SimulationError: integrator failures, with ``leg`` naming the failing leg
    """
    opts = opts or IntegratorOptions()
    tol = Config.VERIFY_TOL if tol is None else tol
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)

    v_P = project_P(sys, e, q, v)
    v_Q = project_Q(sys, e, q, v)
    p_P = momenta_from_velocity(sys, q, v_P)
    p_Q = jacobi_momenta_from_velocity(sys, e, q, v_Q)

    s_grid = np.linspace(0.0, s_end, samples)

    if mechanical_oracle is None:
        try:
            mech = integrate(PhaseField.mechanical(sys), AdaptedState(0.0, q, p_P), s_end,
                             opts, output_times=s_grid)
        except SimulationError as err:
            err.leg = 'mechanical'
            raise
        times = mech.times()
        positions = mech.positions()
    else:
        per_interval = max(1, math.ceil((s_end / (samples - 1)) / opts.step - 1e-9))
        times = np.linspace(0.0, s_end, per_interval * (samples - 1) + 1)
        positions = np.array([mechanical_oracle(s) for s in times])

    try:
        gaps = _gaps_along(sys, e, positions)
    except SimulationError as err:
        err.leg = 'mechanical'
        raise
    h = cumulative_simpson(gaps, x=times, initial=0.0)
    residual = float(np.max(np.abs(_derivative(h, times) - gaps)))

    indices = _grid_indices(times, s_grid)
    h_grid = h[indices]
    mech_on_grid = positions[indices]

    try:
        kin = integrate(PhaseField.jacobi(sys, e), AdaptedState(0.0, q, p_Q), float(h_grid[-1]),
                        opts, output_times=h_grid[1:-1])
    except SimulationError as err:
        err.leg = 'kinetic'
        raise
    kin_on_grid = np.array([kin.state_at(hs).q for hs in h_grid])

    deviation = float(np.max(np.linalg.norm(mech_on_grid - kin_on_grid, axis=1)))
    monotone = bool(np.all(np.diff(h) > 0.0))
    passed = monotone and deviation <= tol
    logger.log_check(f"maupertuis {sys.tag} e={e!r}", deviation, tol, passed)

    return VerificationReport(
        e=float(e),
        v_q=v.tolist(),
        s_grid=s_grid.tolist(),
        max_position_deviation=deviation,
        max_h_residual=residual,
        h_samples=h_grid.tolist(),
        passed=passed,
        tolerance=float(tol),
        system_tag=sys.tag,
        integrator=opts.describe(),
        mechanical_endpoint=mech_on_grid[-1].tolist(),
        kinetic_endpoint=kin_on_grid[-1].tolist(),
    )


# Second-order disk equations ==========================================================

def lagrange_dalembert_residual(name, e, state: AdaptedState, delta=1e-4) -> float:
    """
    Compare the closed second-order Jacobi-kinetic disk equations with the
    Hamiltonian Jacobi field

    The chart acceleration along the flow is taken by central differences of
    qdot over one rk4 step of +-delta.

    Returns:
        max |(thetaddot, phiddot) - closed form|
    """
    definition = builtin(name).definition

    def rhs(t, y):
        qdot, pdot = jacobi_field(definition, e, AdaptedState(t, y[:definition.n], y[definition.n:]))
        return np.concatenate([qdot, pdot])

    y0 = state.as_vector()
    forward = rk4_step(rhs, 0.0, y0, delta)
    backward = rk4_step(rhs, 0.0, y0, -delta)
    qddot = (rhs(delta, forward) - rhs(-delta, backward))[:definition.n] / (2.0 * delta)
    qdot = rhs(0.0, y0)[:definition.n]

    expected = kinetic_disk_accelerations(name, e, state.q, qdot)
    residual = float(np.max(np.abs(qddot[2:4] - np.asarray(expected))))
    logger.debug(f"Lagrange-d'Alembert residual on {name} at q={state.q.tolist()}: {residual:.3e}")
    return residual
