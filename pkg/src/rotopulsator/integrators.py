"""Dormand-Prince 5(4) stepping with an optional post-step hook.

The hook lets callers re-project onto a constraint manifold after every
accepted step.  Because the hook can move the state, the first-same-as-last
stage is not reused.
"""

from dataclasses import dataclass

import numpy as np

from .errors import StepUnderflow

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class StepOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    dt_min: float = 1e-12
    adaptive: bool = True
    max_steps: int = 10_000_000


def dopri_step(f, t, y, h):
    """One Dormand-Prince step; returns ``(y5, error_estimate)``."""
    k = np.empty((7,) + y.shape)
    k[0] = f(t, y)
    for s in range(1, 7):
        ys = y + h * np.tensordot(_A[s], k[:s], axes=1)
        k[s] = f(t + _C[s] * h, ys)
    y5 = y + h * np.tensordot(_B5, k, axes=1)
    err = h * np.tensordot(_E, k, axes=1)
    return y5, err


def _error_norm(err, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def sample_times(t0, dt, t_end):
    """Uniform output grid ``t0, t0 + dt, ...`` ending exactly at ``t_end``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not t_end > t0:
        raise ValueError("t_end must exceed the initial time")
    count = int(np.floor((t_end - t0) / dt + 1e-9))
    times = t0 + dt * np.arange(count + 1)
    if t_end - times[-1] > 1e-9 * dt:
        times = np.append(times, t_end)
    else:
        times[-1] = t_end
    return times


def march(f, y0, times, options, after_step=None, on_sample=None):
    """Integrate ``y' = f(t, y)`` and return the state at each entry of ``times``.

    ``after_step(t, y)`` is called on every accepted step and must return the
    (possibly corrected) state.  In fixed-step mode each output interval is a
    single step.  ``on_sample(k, y)`` fires whenever output ``k`` is reached.
    """
    y = np.array(y0, dtype=float)
    out = [y.copy()]
    h = times[1] - times[0] if len(times) > 1 else 0.0
    steps = 0
    for t_start, t_stop in zip(times[:-1], times[1:]):
        t = t_start
        if not options.adaptive:
            y, _ = dopri_step(f, t, y, t_stop - t)
            if after_step is not None:
                y = after_step(t_stop, y)
            out.append(y.copy())
            if on_sample is not None:
                on_sample(len(out) - 1, y)
            continue
        while t < t_stop:
            step = min(h, t_stop - t)
            last = t + step >= t_stop - 1e-15 * max(1.0, abs(t_stop))
            if last:
                step = t_stop - t
            y_new, err = dopri_step(f, t, y, step)
            e = _error_norm(err, y, y_new, options.rtol, options.atol)
            factor = 5.0 if e == 0.0 else min(5.0, max(0.2, 0.9 * e ** -0.2))
            if e <= 1.0:
                t = t_stop if last else t + step
                y = y_new if after_step is None else after_step(t, y_new)
                steps += 1
                if steps > options.max_steps:
                    raise StepUnderflow(f"exceeded {options.max_steps} steps")
                if not last or factor < 1.0:
                    h = step * factor
            else:
                h = step * factor
                if h < options.dt_min:
                    raise StepUnderflow(f"adaptive step {h:.3e} fell below dt_min={options.dt_min:.1e} at t={t:.6g}")
        out.append(y.copy())
        if on_sample is not None:
            on_sample(len(out) - 1, y)
    return np.array(out)
