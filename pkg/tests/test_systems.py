import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from errors import NoAnalyticH, NoAnalyticSolution, UnknownSystem
from geometry import frame_at, gram_at, local_geometry
from systems import (
    analytic_h,
    analytic_state,
    builtin,
    builtin_names,
    kinetic_disk_accelerations,
    list_systems,
    load_system_file,
    resolve_system,
)
from validator import ValidationError


def test_four_builtin_systems():
    assert builtin_names() == ['disk-free', 'disk-harmonic', 'disk-linear', 'particle-r3-linear']
    assert len(list_systems()) == 4


def test_metadata():
    meta = {entry['name']: entry for entry in list_systems()}
    assert meta['disk-harmonic'] == {'name': 'disk-harmonic', 'n': 4, 'm': 2, 'has_analytic': True}
    assert meta['particle-r3-linear']['has_analytic'] is False
    assert meta['particle-r3-linear']['n'] == 3


def test_unknown_system():
    with pytest.raises(UnknownSystem):
        builtin('chaplygin-sleigh')
    with pytest.raises(UnknownSystem):
        builtin('')


def test_disk_frame_and_periodicity(disk_harmonic):
    q = np.array([1.0, 2.0, 3.0, 0.6])
    assert_allclose(frame_at(disk_harmonic, q), [[math.cos(0.6), 0.0], [math.sin(0.6), 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert disk_harmonic.chart_bounds.periodic == (False, False, True, True)


def test_disk_potential_gradients():
    q = np.array([0.0, 0.0, 0.0, 0.3])
    assert_allclose(local_geometry(builtin('disk-harmonic').definition, q).dV, [0.0, 0.0, 0.0, 0.3])
    assert_allclose(local_geometry(builtin('disk-linear').definition, q).dV, [0.0, 0.0, 0.0, 1.0])
    assert_allclose(local_geometry(builtin('disk-free').definition, q).dV, 0.0)


def test_analytic_harmonic_example():
    q, v = analytic_state('disk-harmonic', np.zeros(4), 1.0, 1.0, 1.0)
    assert q[2] == pytest.approx(1.0)
    assert q[3] == pytest.approx(math.sin(1.0))
    assert v[3] == pytest.approx(math.cos(1.0))
    x_exact, _ = quad(lambda s: math.cos(math.sin(s)), 0.0, 1.0, epsabs=1e-14)
    assert q[0] == pytest.approx(x_exact, abs=1e-12)


def test_analytic_state_without_closed_form():
    with pytest.raises(NoAnalyticSolution):
        analytic_state('particle-r3-linear', np.zeros(3), 1.0, 1.0, 1.0)


def test_analytic_h_spot_values():
    assert analytic_h('disk-linear', 2.0, 0.0, 1.0, 1.0) == pytest.approx(5.0 / 3.0, abs=1e-14)
    assert analytic_h('disk-harmonic', 1.0, 0.0, 1.0, math.pi) == pytest.approx(0.75 * math.pi, abs=1e-14)
    with pytest.raises(NoAnalyticH):
        analytic_h('disk-free', 1.0, 0.0, 1.0, 1.0)


@pytest.mark.parametrize('name,e', [('disk-linear', 2.0), ('disk-harmonic', 1.5)])
def test_analytic_h_is_integral_of_gap(name, e):
    definition = builtin(name).definition
    phi0, omega = 0.2, 0.6
    for s in np.linspace(0.1, 2.0, 7):
        integral, _ = quad(
            lambda u: e - definition.potential(analytic_state(name, [0, 0, 0, phi0], 1.0, omega, u)[0]),
            0.0, s, epsabs=1e-13,
        )
        assert analytic_h(name, e, phi0, omega, s) == pytest.approx(integral, abs=1e-10)


def test_kinetic_disk_accelerations_free_disk_is_straight():
    assert kinetic_disk_accelerations('disk-free', 1.0, np.zeros(4), [1.0, 1.0, 1.0, 1.0]) == (0.0, 0.0)
    with pytest.raises(NoAnalyticSolution):
        kinetic_disk_accelerations('particle-r3-linear', 1.0, np.zeros(3), np.zeros(3))


def test_load_system_file(tmp_path):
    path = tmp_path / 'skate.json'
    path.write_text(json.dumps({
        'name': 'skate',
        'n': 3,
        'm': 2,
        'metric': 'euclidean',
        'potential': 'q2',
        'frame': [['cos(q3)', 'sin(q3)', '0'], ['0', '0', '1']],
        'periodic': [False, False, True],
    }))
    sys = load_system_file(path)
    assert (sys.n, sys.m, sys.tag) == (3, 2, 'skate')
    q = np.array([0.0, 0.0, 0.5])
    gram, _ = gram_at(sys, q)
    assert_allclose(gram, np.eye(2), atol=1e-14)
    loc = local_geometry(sys, q)
    assert_allclose(loc.dV, [0.0, 1.0, 0.0], atol=1e-9)
    assert resolve_system(str(path)).tag == 'skate'


def test_load_system_file_with_metric_rows(tmp_path):
    path = tmp_path / 'scaled.json'
    path.write_text(json.dumps({
        'n': 2, 'm': 1,
        'metric': [['2', '0'], ['0', '1 + q1^2']],
        'frame': [['1', 'q1']],
    }))
    sys = load_system_file(path)
    assert sys.tag == 'scaled'
    gram, _ = gram_at(sys, np.array([1.0, 0.0]))
    assert gram[0, 0] == pytest.approx(2.0 + 2.0)


@pytest.mark.parametrize('payload', [
    {'n': 2, 'frame': [['1', '0']]},
    {'n': 2, 'm': 3, 'frame': [['1', '0']] * 3},
    {'n': 2, 'm': 1, 'frame': [['1', 'x']]},
    {'n': 2, 'm': 2, 'frame': [['1', '0']]},
])
def test_malformed_system_file(tmp_path, payload):
    path = tmp_path / 'bad.json'
    path.write_text(json.dumps(payload))
    with pytest.raises(ValidationError):
        load_system_file(path)


def test_resolve_builtin():
    assert resolve_system('disk-linear').tag == 'disk-linear'
