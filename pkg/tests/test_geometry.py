import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import FrameDegenerate, JacobianUnavailable, MetricSingular
from geometry import (
    ChartBounds,
    SystemDefinition,
    check_frame_jacobians,
    complement_frame,
    frame_coefficients,
    frame_data,
    grad_potential,
    gram_at,
    is_constant_potential,
    kinetic_part,
    local_geometry,
    metric_derivative_at,
    potential_differential_at,
    projector_at,
    structure_functions_at,
)
from systems import builtin, builtin_names


def _numeric_twin(sys):
    """Same system with every derivative left to finite differences"""
    return SystemDefinition(
        n=sys.n, m=sys.m, metric=sys.metric, potential=sys.potential, frame=sys.frame,
        chart_bounds=sys.chart_bounds, tag=sys.tag + '-fd',
    )


def test_particle_gram_at_y_one(particle):
    gram, gram_inv = gram_at(particle, np.array([0.0, 1.0, 0.0]))
    assert_allclose(gram, np.diag([2.0, 1.0]), atol=1e-15)
    assert_allclose(gram_inv, np.diag([0.5, 1.0]), atol=1e-15)


@pytest.mark.parametrize('phi', [0.0, 0.7, -2.5])
def test_disk_gram_is_constant(disk_harmonic, phi):
    gram, _ = gram_at(disk_harmonic, np.array([0.3, -1.0, 2.0, phi]))
    assert_allclose(gram, np.diag([2.0, 1.0]), atol=1e-15)


def test_degenerate_frame_is_rejected():
    sys = SystemDefinition(
        n=3, m=2, metric=lambda q: np.eye(3), potential=lambda q: 0.0,
        frame=(lambda q: np.array([1.0, 0.0, 0.0]), lambda q: np.array([q[0], 0.0, 0.0])),
    )
    with pytest.raises(FrameDegenerate):
        gram_at(sys, np.array([1.0, 0.0, 0.0]))


def test_indefinite_metric_is_rejected():
    sys = SystemDefinition(
        n=2, m=1, metric=lambda q: np.diag([1.0, -1.0]), potential=lambda q: 0.0,
        frame=(lambda q: np.array([1.0, 0.0]),),
    )
    with pytest.raises(MetricSingular):
        gram_at(sys, np.zeros(2))


@pytest.mark.parametrize('name', builtin_names())
def test_projector_is_g_orthogonal_idempotent(name, rng):
    sys = builtin(name).definition
    q = rng.normal(size=sys.n)
    P = projector_at(sys, q)
    G = sys.metric(q)
    assert_allclose(P @ P, P, atol=1e-13)
    assert_allclose(G @ P, (G @ P).T, atol=1e-13)


@pytest.mark.parametrize('name', builtin_names())
def test_complement_frame_is_orthonormal(name, rng):
    sys = builtin(name).definition
    q = rng.normal(size=sys.n)
    data = frame_data(sys, q)
    G = sys.metric(q)
    assert data.Y.shape == (sys.n, sys.n - sys.m)
    assert_allclose(data.Y.T @ G @ data.X, 0.0, atol=1e-13)
    assert_allclose(data.Y.T @ G @ data.Y, np.eye(sys.n - sys.m), atol=1e-13)


def test_complement_of_full_rank_distribution_is_empty():
    sys = SystemDefinition(
        n=2, m=2, metric=lambda q: np.eye(2), potential=lambda q: 0.0,
        frame=(lambda q: np.array([1.0, 0.0]), lambda q: np.array([0.0, 1.0])),
    )
    assert complement_frame(sys, np.zeros(2)).shape == (2, 0)


def test_particle_structure_function_at_y_one(particle):
    C_D, _ = structure_functions_at(particle, np.array([0.0, 1.0, 0.0]))
    assert C_D[0, 1, 0] == pytest.approx(-0.5, abs=1e-14)
    assert C_D[1, 0, 0] == pytest.approx(0.5, abs=1e-14)
    assert C_D[0, 1, 1] == pytest.approx(0.0, abs=1e-14)


def test_disk_brackets_leave_the_distribution(disk_harmonic):
    C_D, C_perp = structure_functions_at(disk_harmonic, np.array([0.0, 0.0, 0.0, 0.4]))
    assert_allclose(C_D, 0.0, atol=1e-14)
    assert np.linalg.norm(C_perp[0, 1]) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize('name', builtin_names())
def test_structure_functions_antisymmetric(name, rng):
    sys = builtin(name).definition
    C_D, C_perp = structure_functions_at(sys, rng.normal(size=sys.n))
    assert_allclose(C_D, -C_D.transpose(1, 0, 2), atol=1e-14)
    assert_allclose(C_perp, -C_perp.transpose(1, 0, 2), atol=1e-14)


@pytest.mark.parametrize('name', builtin_names())
def test_local_geometry_matches_basis_solve(name, rng):
    sys = builtin(name).definition
    q = rng.normal(size=sys.n)
    C_D, _ = structure_functions_at(sys, q)
    assert_allclose(local_geometry(sys, q).C, C_D, atol=1e-13)


@pytest.mark.parametrize('name', builtin_names())
def test_analytic_frame_jacobians_match_differences(name, rng):
    sys = builtin(name).definition
    assert check_frame_jacobians(sys, rng.normal(size=sys.n)) < 1e-8


def test_finite_difference_fallback_matches_analytic(particle):
    q = np.array([0.2, 1.0, -0.4])
    exact = local_geometry(particle, q)
    numeric = local_geometry(_numeric_twin(particle), q)
    assert_allclose(numeric.C, exact.C, atol=1e-9)
    assert_allclose(numeric.dgram_inv, exact.dgram_inv, atol=1e-9)
    assert_allclose(numeric.dV, exact.dV, atol=1e-9)


def test_gram_inverse_derivative(particle):
    # d g^{11} / dy = -2y / (1 + y^2)^2
    y = 0.7
    loc = local_geometry(particle, np.array([0.0, y, 0.0]))
    assert loc.dgram_inv[1, 0, 0] == pytest.approx(-2 * y / (1 + y * y) ** 2, rel=1e-13)
    assert_allclose(loc.dgram_inv[0], 0.0, atol=1e-15)


def test_stencil_outside_bounds():
    bounds = ChartBounds((0.0, 0.0), (1.0, 1.0), (False, False))
    sys = SystemDefinition(
        n=2, m=1, metric=lambda q: np.eye(2), potential=lambda q: q[0] ** 2,
        frame=(lambda q: np.array([1.0, q[0]]),), chart_bounds=bounds,
    )
    with pytest.raises(JacobianUnavailable):
        potential_differential_at(sys, np.array([0.0, 0.5]))
    assert potential_differential_at(sys, np.array([0.5, 0.5]))[0] == pytest.approx(1.0, abs=1e-9)


def test_grad_potential(particle, disk_harmonic):
    assert_allclose(grad_potential(particle, np.array([3.0, -2.0, 5.0])), [0.0, 0.0, 1.0])
    assert_allclose(grad_potential(disk_harmonic, np.array([0.0, 0.0, 0.0, 0.3])), [0.0, 0.0, 0.0, 0.3])


def test_metric_derivative_fallback_vanishes_for_constant_metric(particle):
    assert_allclose(metric_derivative_at(_numeric_twin(particle), np.array([1.0, 2.0, 3.0])), 0.0, atol=1e-10)


def test_frame_coefficients_of_frame_vector(particle):
    q = np.array([0.0, 2.0, 0.0])
    v = 3.0 * np.array([1.0, 0.0, 2.0]) - np.array([0.0, 1.0, 0.0])
    assert_allclose(frame_coefficients(particle, q, v), [3.0, -1.0], atol=1e-14)


def test_kinetic_part_drops_potential(disk_harmonic):
    kinetic = kinetic_part(disk_harmonic)
    q = np.array([0.0, 0.0, 0.0, 1.5])
    assert kinetic.potential(q) == 0.0
    assert_allclose(potential_differential_at(kinetic, q), 0.0)
    assert kinetic.n == 4 and kinetic.m == 2


def test_wrap_into_half_open_interval():
    bounds = ChartBounds.unbounded(2, periodic=[False, True])
    assert_allclose(bounds.wrap([7.0, 5.0]), [7.0, 5.0 - 2 * math.pi])
    assert_allclose(bounds.wrap([7.0, -math.pi]), [7.0, math.pi])
    assert bounds.wrap([0.0, 2.0])[1] == 2.0


@pytest.mark.parametrize('name, expected', [
    ('particle-r3-linear', False), ('disk-harmonic', False), ('disk-linear', False), ('disk-free', True),
])
def test_declared_constant_potential(name, expected):
    sys = builtin(name).definition
    assert is_constant_potential(sys) is expected
    assert is_constant_potential(kinetic_part(sys)) is True


def _flat_plane(potential, chart_bounds=None):
    return SystemDefinition(
        n=2, m=1, metric=lambda q: np.eye(2), potential=potential,
        frame=(lambda q: np.array([1.0, q[0]]),), chart_bounds=chart_bounds,
    )


def test_constant_potential_is_sampled_when_undeclared():
    assert is_constant_potential(_flat_plane(lambda q: 0.0))
    assert is_constant_potential(_flat_plane(lambda q: 4.0), q=[10.0, -3.0])
    # dV vanishes at the origin only
    assert not is_constant_potential(_flat_plane(lambda q: q[0] ** 2), q=np.zeros(2))
    bounded = ChartBounds((0.0, 0.0), (1.0, 1.0), (False, False))
    assert not is_constant_potential(_flat_plane(lambda q: (q[1] - 0.5) ** 2, bounded), q=[0.5, 0.5])
