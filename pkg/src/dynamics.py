"""
Adapted-coordinate Hamiltonian dynamics
Mechanical and Jacobi-kinetic nonholonomic vector fields on D*, ODE
integration and conserved-quantity monitors
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from config import Config
from errors import HillBoundary, NotInDistribution, SimulationError, ChartExit
from geometry import (
    SystemDefinition,
    frame_at,
    frame_coefficients,
    gram_at,
    local_geometry,
    metric_at,
    projector_at,
)
from integrators import integrate_adaptive, integrate_fixed
from logger import logger
from validator import Validator, ValidationError


@dataclass(frozen=True)
class AdaptedState:
    """A point (q^i, p_a) of D* at time t"""

    t: float
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'q', np.asarray(self.q, dtype=float))
        object.__setattr__(self, 'p', np.asarray(self.p, dtype=float))

    def as_vector(self):
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_vector(cls, t, y, n):
        return cls(float(t), y[:n], y[n:])


@dataclass(frozen=True)
class IntegratorOptions:
    """rk4 with a fixed step or rkf45 with absolute/relative tolerances"""

    method: str = field(default_factory=lambda: Config.DEFAULT_METHOD)
    step: float = field(default_factory=lambda: Config.DEFAULT_STEP)
    rtol: float = field(default_factory=lambda: Config.RTOL)
    atol: float = field(default_factory=lambda: Config.ATOL)

    def __post_init__(self):
        object.__setattr__(self, 'method', Validator.validate_method(self.method))
        Validator.validate_positive(self.step, 'step')
        Validator.validate_positive(self.rtol, 'rtol')
        Validator.validate_positive(self.atol, 'atol')

    @classmethod
    def rk4(cls, step=None):
        return cls(method='rk4', step=Config.DEFAULT_STEP if step is None else step)

    @classmethod
    def rkf45(cls, tol=None):
        tol = Config.RTOL if tol is None else tol
        return cls(method='rkf45', rtol=tol, atol=tol)

    def describe(self):
        if self.method == 'rk4':
            return {'method': 'rk4', 'step': self.step}
        return {'method': 'rkf45', 'rtol': self.rtol, 'atol': self.atol}


@dataclass(frozen=True)
class Trajectory:
    """Time-sampled adapted states with integrator metadata"""

    samples: Tuple[AdaptedState, ...]
    system_tag: str
    integrator: dict
    energy_series: Tuple[float, ...]

    def times(self):
        return np.array([s.t for s in self.samples])

    def positions(self):
        return np.array([s.q for s in self.samples])

    def momenta(self):
        return np.array([s.p for s in self.samples])

    @property
    def final(self):
        return self.samples[-1]

    def state_at(self, t, rtol=1e-12):
        """The sample recorded at time t (forced output times are always recorded)"""
        times = self.times()
        k = int(np.searchsorted(times, t))
        for idx in (k - 1, k):
            if 0 <= idx < len(times) and abs(times[idx] - t) <= rtol * max(1.0, abs(t)):
                return self.samples[idx]
        raise KeyError(f"No sample at t={t!r}; request it through output_times")


# Pointwise quantities =================================================================

def hill_gap(sys: SystemDefinition, e, q, potential=None, eps=None) -> float:
    """e - V(q), raising HillBoundary at the zero-velocity surface"""
    eps = Config.HILL_EPS if eps is None else eps
    V = float(sys.potential(np.asarray(q, dtype=float))) if potential is None else potential
    gap = e - V
    if gap <= eps:
        raise HillBoundary(
            f"e - V(q) = {gap!r} <= {eps!r} at q={np.asarray(q).tolist()}"
        )
    return gap


def energy(sys: SystemDefinition, state: AdaptedState) -> float:
    """H = 1/2 g^{ab} p_a p_b + V(q)"""
    _, gram_inv = gram_at(sys, state.q)
    return float(0.5 * state.p @ gram_inv @ state.p + sys.potential(state.q))


def jacobi_energy(sys: SystemDefinition, e, state: AdaptedState) -> float:
    """H_e = g^{ab} p_a p_b / (2 (e - V(q)))"""
    gap = hill_gap(sys, e, state.q)
    _, gram_inv = gram_at(sys, state.q)
    return float(0.5 * state.p @ gram_inv @ state.p / gap)


def velocity_from_momenta(sys: SystemDefinition, q, p) -> np.ndarray:
    """v = y^a X_a with y^a = g^{ab} p_b"""
    _, gram_inv = gram_at(sys, q)
    return frame_at(sys, q) @ (gram_inv @ np.asarray(p, dtype=float))


def constraint_residual(sys: SystemDefinition, q, v) -> float:
    """G-norm of the component of v outside D_q"""
    v = np.asarray(v, dtype=float)
    G = metric_at(sys, q)
    r = v - projector_at(sys, q) @ v
    return float(np.sqrt(max(r @ G @ r, 0.0)))


def momenta_from_velocity(sys: SystemDefinition, q, v, tol=None) -> np.ndarray:
    """
    Adapted momenta p_a = g_ab y^b of a velocity in D_q

    Raises:
        NotInDistribution: If the constraint residual exceeds tol * |v|
    """
    v = np.asarray(v, dtype=float)
    tol = Config.CONSTRAINT_TOL if tol is None else tol
    residual = constraint_residual(sys, q, v)
    if residual > tol * np.linalg.norm(v):
        raise NotInDistribution(
            f"Velocity {v.tolist()} violates the constraint at q={np.asarray(q).tolist()} "
            f"(residual {residual:.3e})"
        )
    gram, _ = gram_at(sys, q)
    return gram @ frame_coefficients(sys, q, v)


# Vector fields ========================================================================

def _kinetic_terms(loc, p):
    y = loc.gram_inv @ p
    curvature = np.einsum('abc,c,b->a', loc.C, p, y)
    dK = 0.5 * np.einsum('kab,a,b->k', loc.dgram_inv, p, p)
    return y, curvature, dK


def mechanical_field(sys: SystemDefinition, e_unused, state: AdaptedState):
    """
    Nonholonomic mechanical equations in adapted coordinates:
    qdot^i = X^i_b g^{ab} p_a,
    pdot_a = -C_ab^c g^{bd} p_c p_d - X^i_a (1/2 dg^{cb}/dq^i p_c p_b + dV/dq^i)
    """
    loc = local_geometry(sys, state.q)
    y, curvature, dK = _kinetic_terms(loc, state.p)
    qdot = loc.X @ y
    pdot = -curvature - loc.X.T @ (dK + loc.dV)
    return qdot, pdot


def jacobi_field(sys: SystemDefinition, e, state: AdaptedState):
    """
    Kinetic equations of the Jacobi co-metric g^# / (e - V) written with the
    data of the mechanical system.
    """
    loc = local_geometry(sys, state.q)
    w = hill_gap(sys, e, state.q, potential=loc.V)
    y, curvature, dK = _kinetic_terms(loc, state.p)
    qdot = loc.X @ y / w
    pdot = -curvature / w - loc.X.T @ (dK / w + loc.dV * (state.p @ y) / (2.0 * w * w))
    return qdot, pdot


@dataclass(frozen=True)
class PhaseField:
    """A vector field on D* together with its conserved Hamiltonian"""

    sys: SystemDefinition
    kind: str = 'mechanical'
    e: Optional[float] = None

    @classmethod
    def mechanical(cls, sys):
        return cls(sys, 'mechanical')

    @classmethod
    def jacobi(cls, sys, e):
        return cls(sys, 'jacobi', float(e))

    def __call__(self, state):
        if self.kind == 'jacobi':
            return jacobi_field(self.sys, self.e, state)
        return mechanical_field(self.sys, self.e, state)

    def energy(self, state):
        if self.kind == 'jacobi':
            return jacobi_energy(self.sys, self.e, state)
        return energy(self.sys, state)

    @property
    def tag(self):
        if self.kind == 'jacobi':
            return f"{self.sys.tag}/jacobi(e={self.e!r})"
        return self.sys.tag


# Integration ==========================================================================

def integrate(phase_field: PhaseField, state0: AdaptedState, t_end, opts=None,
              output_times: Optional[Sequence[float]] = None) -> Trajectory:
    """
    Integrate a phase field from state0 to t_end

    Args:
        phase_field: Mechanical or Jacobi field
        state0: Initial adapted state
        t_end: Final time (> state0.t)
        opts: IntegratorOptions (default rk4, Config.DEFAULT_STEP)
        output_times: Extra times that must appear as samples

    Returns:
        Trajectory sampled at every accepted step plus the output times

    Raises:
        SimulationError: field errors with the failing time attached
        StepUnderflow: adaptive step collapse
    """
    opts = opts or IntegratorOptions()
    sys = phase_field.sys
    n = sys.n
    if len(state0.q) != n or len(state0.p) != sys.m:
        raise ValidationError(
            f"State must have {n} positions and {sys.m} momenta, "
            f"got {len(state0.q)} and {len(state0.p)}"
        )
    if not t_end > state0.t:
        raise ValidationError(f"t_end={t_end} must exceed the initial time {state0.t}")

    def rhs(t, y):
        try:
            qdot, pdot = phase_field(AdaptedState(t, y[:n], y[n:]))
        except SimulationError as e:
            if e.t is None:
                e.t = t
            raise
        return np.concatenate([qdot, pdot])

    y0 = state0.as_vector()
    try:
        if opts.method == 'rk4':
            times, states, steps = integrate_fixed(rhs, state0.t, y0, t_end, opts.step, output_times)
        else:
            times, states, steps = integrate_adaptive(
                rhs, state0.t, y0, t_end, opts.rtol, opts.atol, output_times
            )
    except SimulationError as e:
        logger.error(f"Integration of {phase_field.tag} failed: {e}")
        raise

    samples = tuple(AdaptedState.from_vector(t, y, n) for t, y in zip(times, states))
    bounds = sys.chart_bounds
    if bounds is not None:
        for s in samples:
            if not bounds.contains(s.q):
                raise ChartExit(f"Left chart bounds at q={s.q.tolist()}", t=s.t)

    energies = tuple(phase_field.energy(s) for s in samples)
    logger.log_integration(phase_field.tag, opts.method, steps, t_end)
    return Trajectory(
        samples=samples,
        system_tag=phase_field.tag,
        integrator=opts.describe(),
        energy_series=energies,
    )


def reconstructed_velocities(sys: SystemDefinition, traj: Trajectory) -> np.ndarray:
    """Chart velocities v = X g^{-1} p along a mechanical trajectory"""
    return np.array([velocity_from_momenta(sys, s.q, s.p) for s in traj.samples])


def speed_squared(sys: SystemDefinition, state: AdaptedState) -> float:
    """|qdot|_g^2 of the mechanical field, equal to g^{ab} p_a p_b"""
    _, gram_inv = gram_at(sys, state.q)
    return float(state.p @ gram_inv @ state.p)
