import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import StepUnderflow
from integrators import RKF45, integrate_adaptive, integrate_fixed, rk4_step


def oscillator(t, y):
    return np.array([y[1], -y[0]])


def exact(t):
    return np.array([math.cos(t), -math.sin(t)])


def test_rk4_global_order():
    steps = [0.1, 0.05, 0.025, 0.0125]
    errors = []
    for h in steps:
        _, states, _ = integrate_fixed(oscillator, 0.0, np.array([1.0, 0.0]), 2.0, h)
        errors.append(np.linalg.norm(states[-1] - exact(2.0)))
    slope = np.polyfit(np.log(steps), np.log(errors), 1)[0]
    assert slope > 3.8


def test_rk4_step_is_exact_for_cubic():
    y = rk4_step(lambda t, y: np.array([3 * t * t]), 0.0, np.array([0.0]), 0.5)
    assert y[0] == pytest.approx(0.125, abs=1e-15)


def test_fixed_step_hits_output_times():
    times, states, steps = integrate_fixed(
        oscillator, 0.0, np.array([1.0, 0.0]), 1.0, 0.03, output_times=[0.1, 0.25, 0.5]
    )
    for t in (0.0, 0.1, 0.25, 0.5, 1.0):
        assert t in times
    assert len(times) == steps + 1
    assert np.all(np.diff(times) <= 0.03 + 1e-15)


def test_fixed_step_accepts_array_output_times():
    requested = np.linspace(0.0, 1.0, 11)
    times, states, _ = integrate_fixed(oscillator, 0.0, np.array([1.0, 0.0]), 1.0, 0.03, output_times=requested)
    for t in requested:
        assert float(t) in times
    assert times[-1] == 1.0
    assert_allclose(states[-1], exact(1.0), atol=1e-7)


def test_fehlberg_tableau_is_consistent():
    for c, row in zip(RKF45.C, RKF45.A):
        assert sum(row) == pytest.approx(c, abs=1e-13)
    assert sum(RKF45.B5) == pytest.approx(1.0, abs=1e-13)
    assert sum(RKF45.TR) == pytest.approx(0.0, abs=1e-13)


def test_fehlberg_step_is_fifth_order():
    y0 = np.array([1.0, 0.0])
    errors = [np.linalg.norm(RKF45().step(oscillator, 0.0, y0, h)[0] - exact(h)) for h in (0.2, 0.1)]
    # local error of the propagated solution is O(h^6)
    assert math.log2(errors[0] / errors[1]) > 5.5


def test_adaptive_meets_tolerance():
    times, states, _ = integrate_adaptive(
        oscillator, 0.0, np.array([1.0, 0.0]), 5.0, rtol=1e-10, atol=1e-10
    )
    assert times[-1] == 5.0
    assert_allclose(states[-1], exact(5.0), atol=1e-8)


def test_dense_output_between_steps():
    requested = np.linspace(0.05, 4.95, 37)
    times, states, _ = integrate_adaptive(
        oscillator, 0.0, np.array([1.0, 0.0]), 5.0, rtol=1e-10, atol=1e-10,
        output_times=requested,
    )
    lookup = dict(zip(times, states))
    for t in requested:
        assert_allclose(lookup[float(t)], exact(t), atol=1e-8)


def test_dense_interpolant_reproduces_endpoints():
    stepper = RKF45(1e-10, 1e-10)
    y0 = np.array([1.0, 0.0])
    y1, _ = stepper.step(oscillator, 0.0, y0, 0.1)
    interpolant = stepper.dense(oscillator, 0.0, y0, y1, 0.1)
    assert_allclose(interpolant(0.0), y0, atol=1e-14)
    assert_allclose(interpolant(0.1), y1, atol=1e-14)


def test_step_limit_raises_underflow():
    with pytest.raises(StepUnderflow):
        integrate_adaptive(oscillator, 0.0, np.array([1.0, 0.0]), 100.0,
                           rtol=1e-12, atol=1e-12, max_steps=3)
