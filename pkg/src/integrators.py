"""
Explicit Runge-Kutta integrators
Fixed-step classical rk4 and adaptive Runge-Kutta-Fehlberg 4(5) with
quintic Hermite dense output
"""
import math

import numpy as np
from scipy.interpolate import KroghInterpolator

from config import Config
from errors import StepUnderflow


def rk4_step(f, t, y, h):
    """One classical fourth-order Runge-Kutta step"""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class RKF45:
    """
    Runge-Kutta-Fehlberg 4(5) pair. Six stages; the 5th order solution is
    propagated and the difference to the embedded 4th order solution is the
    local error estimate.
    """

    #intermediate evaluation times
    C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)

    #butcher table
    A = (
        (),
        (1 / 4,),
        (3 / 32, 9 / 32),
        (1932 / 2197, -7200 / 2197, 7296 / 2197),
        (439 / 216, -8.0, 3680 / 513, -845 / 4104),
        (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
    )

    #5th order weights
    B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)

    #coefficients for local truncation error estimate
    TR = (1 / 360, 0.0, -128 / 4275, -2197 / 75240, 1 / 50, 2 / 55)

    def __init__(self, rtol=None, atol=None):
        self.rtol = Config.RTOL if rtol is None else rtol
        self.atol = Config.ATOL if atol is None else atol

    def step(self, f, t, y, h):
        """
        Attempt one step

        Returns:
            (y_new, scaled error norm); the step is acceptable when the norm <= 1
        """
        k = []
        for stage in range(6):
            yi = y.copy()
            for a, kj in zip(self.A[stage], k):
                yi += h * a * kj
            k.append(f(t + self.C[stage] * h, yi))
        y_new = y + h * sum(b * kj for b, kj in zip(self.B5, k))
        err = h * sum(e * kj for e, kj in zip(self.TR, k))
        scale = self.atol + self.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.max(np.abs(err) / scale))
        return y_new, err_norm

    def dense(self, f, t, y, y_new, h):
        """Quintic Hermite interpolant through (y, y') at t, t + h/2 and t + h"""
        y_mid, _ = self.step(f, t, y, 0.5 * h)
        t_mid = t + 0.5 * h
        nodes = [t, t, t_mid, t_mid, t + h, t + h]
        values = np.vstack([y, f(t, y), y_mid, f(t_mid, y_mid), y_new, f(t + h, y_new)])
        return KroghInterpolator(nodes, values)


def _breakpoints(t0, t_end, output_times):
    requested = () if output_times is None else np.asarray(output_times, dtype=float).ravel()
    times = {float(t) for t in requested if t0 < t < t_end}
    times.add(float(t_end))
    return sorted(times)


def integrate_fixed(f, t0, y0, t_end, h, output_times=None):
    """
    Fixed-step rk4 from t0 to t_end.

    Requested output times are hit exactly by splitting every interval
    between consecutive output times into equal steps no longer than h.

    Returns:
        (times, states, number_of_steps)
    """
    times = [t0]
    states = [np.array(y0, dtype=float)]
    t, y = t0, states[0]
    steps = 0
    for t_stop in _breakpoints(t0, t_end, output_times):
        span = t_stop - t
        count = max(1, math.ceil(span / h - 1e-9))
        dt = span / count
        t_start = t
        for i in range(count):
            t_next = t_stop if i == count - 1 else t_start + (i + 1) * dt
            y = rk4_step(f, t, y, t_next - t)
            t = t_next
            times.append(t)
            states.append(y)
            steps += 1
    return times, states, steps


def integrate_adaptive(f, t0, y0, t_end, rtol=None, atol=None, output_times=None,
                       h0=None, max_steps=None):
    """
    Adaptive rkf45 from t0 to t_end.

    Accepted steps are recorded; requested output times falling inside a
    step are filled from the quintic Hermite interpolant of that step.

    The local error is controlled per unit step (scaled by span / h), so the
    accumulated endpoint error stays on the order of the tolerances.

    Raises:
        StepUnderflow: If the step size collapses or max_steps is exceeded

    Returns:
        (times, states, number_of_accepted_steps)
    """
    stepper = RKF45(rtol, atol)
    max_steps = Config.MAX_STEPS if max_steps is None else max_steps
    pending = [t for t in _breakpoints(t0, t_end, output_times) if t < t_end]
    times = [t0]
    states = [np.array(y0, dtype=float)]
    t, y = t0, states[0]
    span = t_end - t0
    h = h0 if h0 is not None else 1e-2 * span
    accepted = 0
    attempts = 0

    while t < t_end:
        attempts += 1
        if attempts > max_steps:
            raise StepUnderflow(f"Exceeded {max_steps} step attempts", t=t)
        h = min(h, t_end - t)
        if h <= 1e-14 * max(1.0, abs(t)):
            raise StepUnderflow(f"Step size underflow (h={h!r})", t=t)

        y_new, err = stepper.step(f, t, y, h)
        err *= span / h
        if not math.isfinite(err):
            h *= 0.2
            continue

        if err <= 1.0:
            t_new = t_end if t_end - (t + h) <= 1e-14 * max(1.0, abs(t_end)) else t + h
            inside = []
            while pending and pending[0] < t_new:
                inside.append(pending.pop(0))
            if inside:
                interpolant = stepper.dense(f, t, y, y_new, t_new - t)
                for t_out in inside:
                    times.append(t_out)
                    states.append(np.asarray(interpolant(t_out), dtype=float))
            if pending and pending[0] == t_new:
                pending.pop(0)
            times.append(t_new)
            states.append(y_new)
            t, y = t_new, y_new
            accepted += 1

        factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.25))
        h *= factor

    return times, states, accepted
