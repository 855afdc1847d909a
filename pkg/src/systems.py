"""
Built-in example systems with closed-form solution oracles, and the loader
for user system-definition files
"""
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from errors import NoAnalyticH, NoAnalyticSolution, UnknownSystem
from expressions import MatrixExpression, ScalarExpression, VectorExpression
from geometry import ChartBounds, SystemDefinition
from logger import logger
from validator import ValidationError, Validator

PARTICLE = 'particle-r3-linear'
DISK_HARMONIC = 'disk-harmonic'
DISK_LINEAR = 'disk-linear'
DISK_FREE = 'disk-free'

DISK_NAMES = (DISK_HARMONIC, DISK_LINEAR, DISK_FREE)


@dataclass(frozen=True)
class BuiltinSystem:
    """A named example system; ``has_analytic`` marks a closed-form trajectory"""

    name: str
    definition: SystemDefinition
    has_analytic: bool

    def metadata(self):
        return {
            'name': self.name,
            'n': self.definition.n,
            'm': self.definition.m,
            'has_analytic': self.has_analytic,
        }


# Particle in R^3 with zdot = y xdot ===================================================

def _particle_r3_linear():
    zero3 = np.zeros((3, 3))

    def jacobian_x1(q):
        J = np.zeros((3, 3))
        J[2, 1] = 1.0
        return J

    return SystemDefinition(
        n=3,
        m=2,
        metric=lambda q: np.eye(3),
        potential=lambda q: float(q[2]),
        potential_gradient=lambda q: np.array([0.0, 0.0, 1.0]),
        frame=(
            lambda q: np.array([1.0, 0.0, q[1]]),
            lambda q: np.array([0.0, 1.0, 0.0]),
        ),
        frame_jacobians=(jacobian_x1, lambda q: zero3),
        metric_derivative=lambda q: np.zeros((3, 3, 3)),
        chart_bounds=ChartBounds.unbounded(3),
        tag=PARTICLE,
        constant_potential=False,
    )


# Vertical rolling disk, q = (x, y, theta, phi) ========================================

def _disk(name, potential, potential_slope, constant_potential=False):
    zero4 = np.zeros((4, 4))

    def rolling(q):
        return np.array([math.cos(q[3]), math.sin(q[3]), 1.0, 0.0])

    def rolling_jacobian(q):
        J = np.zeros((4, 4))
        J[0, 3] = -math.sin(q[3])
        J[1, 3] = math.cos(q[3])
        return J

    return SystemDefinition(
        n=4,
        m=2,
        metric=lambda q: np.eye(4),
        potential=lambda q: potential(q[3]),
        potential_gradient=lambda q: np.array([0.0, 0.0, 0.0, potential_slope(q[3])]),
        frame=(rolling, lambda q: np.array([0.0, 0.0, 0.0, 1.0])),
        frame_jacobians=(rolling_jacobian, lambda q: zero4),
        metric_derivative=lambda q: np.zeros((4, 4, 4)),
        chart_bounds=ChartBounds.unbounded(4, periodic=[False, False, True, True]),
        tag=name,
        constant_potential=constant_potential,
    )


_FACTORIES = {
    PARTICLE: lambda: _particle_r3_linear(),
    DISK_HARMONIC: lambda: _disk(DISK_HARMONIC, lambda phi: 0.5 * phi * phi, lambda phi: phi),
    DISK_LINEAR: lambda: _disk(DISK_LINEAR, lambda phi: phi, lambda phi: 1.0),
    DISK_FREE: lambda: _disk(DISK_FREE, lambda phi: 0.0, lambda phi: 0.0, constant_potential=True),
}

_ANALYTIC = {DISK_HARMONIC, DISK_LINEAR, DISK_FREE}


def builtin(name) -> BuiltinSystem:
    """
    Look up a builtin example system

    Raises:
        UnknownSystem: If the name is not recognized
    """
    try:
        name = Validator.validate_system_name(name)
    except ValidationError as e:
        raise UnknownSystem(str(e))
    if name not in _FACTORIES:
        raise UnknownSystem(
            f"Unknown system: {name}. Builtin systems: {', '.join(sorted(_FACTORIES))}"
        )
    return BuiltinSystem(name, _FACTORIES[name](), name in _ANALYTIC)


def builtin_names():
    return sorted(_FACTORIES)


def list_systems():
    """Metadata of every builtin system, sorted by name"""
    return [builtin(name).metadata() for name in builtin_names()]


# Closed-form oracles ==================================================================

def _steering_angle(name, phi0, omega, t):
    """(phi(t), phidot(t)) of the disk examples"""
    if name == DISK_HARMONIC:
        return (phi0 * math.cos(t) + omega * math.sin(t),
                -phi0 * math.sin(t) + omega * math.cos(t))
    if name == DISK_LINEAR:
        return omega * t + phi0 - 0.5 * t * t, omega - t
    return phi0 + omega * t, omega


def analytic_state(name, q0, Omega, omega, t):
    """
    Closed-form disk trajectory with initial angular velocities (Omega, omega)

    theta and phi are exact; x and y integrate Omega (cos phi, sin phi) by
    adaptive Gauss-Kronrod quadrature.

    Returns:
        (q(t), qdot(t)) as chart vectors

    Raises:
        NoAnalyticSolution: If the system has no closed form
    """
    if name not in _ANALYTIC:
        raise NoAnalyticSolution(f"{name} has no closed-form trajectory")
    x0, y0, theta0, phi0 = (float(c) for c in q0)
    t = float(t)

    def phi(s):
        return _steering_angle(name, phi0, omega, s)[0]

    if t == 0.0:
        x_int = y_int = 0.0
    else:
        x_int, _ = quad(lambda s: math.cos(phi(s)), 0.0, t, epsabs=1e-14, epsrel=1e-13, limit=200)
        y_int, _ = quad(lambda s: math.sin(phi(s)), 0.0, t, epsabs=1e-14, epsrel=1e-13, limit=200)

    phi_t, phidot_t = _steering_angle(name, phi0, omega, t)
    q = np.array([x0 + Omega * x_int, y0 + Omega * y_int, theta0 + Omega * t, phi_t])
    v = np.array([Omega * math.cos(phi_t), Omega * math.sin(phi_t), Omega, phidot_t])
    return q, v


def analytic_h(name, e, phi0, omega, s):
    """
    Closed-form reparametrization h(s) = int_0^s (e - V(c(u))) du for the
    disks with a potential

    Raises:
        NoAnalyticH: For systems without a closed form
    """
    if name == DISK_LINEAR:
        return e * s + s ** 3 / 6.0 - omega * s * s / 2.0 - phi0 * s
    if name == DISK_HARMONIC:
        return e * s - 0.5 * (
            (phi0 ** 2 - omega ** 2) * math.cos(s) * math.sin(s) / 2.0
            + (phi0 ** 2 + omega ** 2) * s / 2.0
            + phi0 * omega * math.sin(s) ** 2
        )
    raise NoAnalyticH(f"{name} has no closed-form reparametrization")


def kinetic_disk_accelerations(name, e, q, qdot):
    """
    Second-order Lagrange-d'Alembert form of the Jacobi-kinetic disk:
    thetaddot = V'(phi) phidot thetadot / (e - V),
    phiddot = V'(phi) (phidot^2 / 2 - thetadot^2) / (e - V).

    Returns:
        (thetaddot, phiddot)
    """
    if name not in DISK_NAMES:
        raise NoAnalyticSolution(f"{name} is not a disk system")
    definition = builtin(name).definition
    phi = float(q[3])
    slope = float(definition.potential_gradient(q)[3])
    gap = e - float(definition.potential(q))
    thetadot, phidot = float(qdot[2]), float(qdot[3])
    return slope * phidot * thetadot / gap, slope * (0.5 * phidot ** 2 - thetadot ** 2) / gap


# System-definition files ==============================================================

def load_system_file(path) -> SystemDefinition:
    """
    Build a SystemDefinition from a JSON system-definition file

    Keys: n, m, metric ("euclidean" or rows of expressions), potential,
    optional potential_gradient, frame (m lists of n expressions), optional
    periodic flags and bounds. Expressions use q1..qn.

    Raises:
        ValidationError: If the file is malformed
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f"Cannot read system file {path}: {e}")

    try:
        n = Validator.validate_count(data['n'], 'n')
        m = Validator.validate_count(data['m'], 'm')
        frame_sources = data['frame']
        potential_source = data.get('potential', '0')
    except KeyError as e:
        raise ValidationError(f"System file {path} is missing key {e}")
    if m > n:
        raise ValidationError(f"Rank m={m} exceeds dimension n={n}")

    metric_source = data.get('metric', 'euclidean')
    if metric_source == 'euclidean':
        identity = np.eye(n)
        metric = lambda q: identity
        metric_derivative = lambda q: np.zeros((n, n, n))
    else:
        metric = MatrixExpression(metric_source, n)
        metric_derivative = (lambda q: np.zeros((n, n, n))) if metric.is_constant else None

    if not isinstance(frame_sources, list) or len(frame_sources) != m:
        raise ValidationError(f"frame must hold {m} vector fields")
    frame = tuple(VectorExpression(f, n, length=n) for f in frame_sources)

    potential = ScalarExpression(potential_source, n)
    gradient = data.get('potential_gradient')
    potential_gradient = VectorExpression(gradient, n, length=n) if gradient else None

    periodic = data.get('periodic', [False] * n)
    bounds = data.get('bounds')
    if bounds is None:
        chart_bounds = ChartBounds.unbounded(n, periodic)
    else:
        if len(bounds) != n:
            raise ValidationError("bounds must give [lower, upper] for every coordinate")
        chart_bounds = ChartBounds(
            tuple(float(b[0]) for b in bounds),
            tuple(float(b[1]) for b in bounds),
            tuple(bool(p) for p in periodic),
        )

    tag = data.get('name', path.stem)
    logger.info(f"Loaded system definition {tag} from {path} (n={n}, m={m})")
    return SystemDefinition(
        n=n,
        m=m,
        metric=metric,
        potential=potential,
        potential_gradient=potential_gradient,
        frame=frame,
        metric_derivative=metric_derivative,
        chart_bounds=chart_bounds,
        tag=tag,
        constant_potential=potential.is_constant,
    )


def resolve_system(name_or_path) -> SystemDefinition:
    """A builtin name or a path to a system-definition file"""
    candidate = Path(str(name_or_path))
    if candidate.suffix == '.json' or candidate.is_file():
        return load_system_file(candidate)
    return builtin(name_or_path).definition
