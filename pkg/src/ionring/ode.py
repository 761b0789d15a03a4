"""Adaptive Dormand-Prince 5(4) integration for dense linear dynamics.

A small self-contained solver: explicit RK with an embedded 4th-order error
estimate, PI step control, FSAL reuse, backward integration (t1 < t0), and
exact landing on requested output times.  States may be real or complex
ndarrays of any shape (kept flat internally by the caller if preferred).

A fixed-step mode is provided for runs where the step is chosen from the
spectral radius of the stiffness matrix rather than local error control.
"""

from __future__ import annotations

import numpy as np

# Dormand-Prince RK5(4)7M coefficients
_C = np.array([0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1.0 / 5.0]),
    np.array([3.0 / 40.0, 9.0 / 40.0]),
    np.array([44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0]),
    np.array([19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0]),
    np.array([9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0]),
    np.array([35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0]),
]
_B5 = np.array([35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0])
_B4 = np.array(
    [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ]
)
_ERR = _B5 - _B4


class IntegrationError(RuntimeError):
    """Step-size underflow or too many steps; carries diagnostics."""

    def __init__(self, message, t=None, h=None, n_steps=None):
        super().__init__(message)
        self.t = t
        self.h = h
        self.n_steps = n_steps


def _rms_error(err, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    e = np.abs(err) / scale
    return float(np.sqrt(np.mean(e * e)))


def integrate(f, t0, t1, y0, rtol=1e-9, atol=None, h0=None, max_step=np.inf,
              fixed_step=None, t_eval=None, max_steps=50_000_000):
    """Integrate dy/dt = f(t, y) from t0 to t1.

    Returns (y_final, snapshots) where snapshots is a list of (t, y) at the
    requested t_eval points (monotone toward t1).  Snapshot times are hit
    exactly by step shortening; no dense interpolation is used, so requesting
    many closely spaced outputs costs extra steps but never accuracy.
    """
    t0 = float(t0)
    t1 = float(t1)
    y = np.array(y0, copy=True)
    if atol is None:
        atol = rtol * 1e-3
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    if span == 0.0:
        return y, []

    targets = []
    if t_eval is not None:
        targets = sorted([float(t) for t in t_eval], reverse=(direction < 0))
        for tt in targets:
            if (tt - t0) * direction < -1e-12 or (t1 - tt) * direction < -1e-12:
                raise ValueError("t_eval point outside integration span")
    snapshots = []

    if fixed_step is not None:
        h = abs(float(fixed_step)) * direction
    else:
        h = (span / 100.0 if h0 is None else abs(float(h0))) * direction
        h = direction * min(abs(h), max_step, span)

    t = t0
    k1 = f(t, y)
    n_steps = 0
    err_prev = 1.0
    safety, order = 0.9, 5.0
    next_target = targets.pop(0) if targets else None

    while (t1 - t) * direction > 1e-14 * max(1.0, abs(t)):
        if n_steps >= max_steps:
            raise IntegrationError("too many steps", t=t, h=h, n_steps=n_steps)
        h_try = h
        hit_target = None
        if next_target is not None and (t + h_try - next_target) * direction >= 0.0:
            h_try = next_target - t
            hit_target = next_target
        if (t + h_try - t1) * direction > 0.0:
            h_try = t1 - t
            hit_target = None if hit_target is None else hit_target
        if abs(h_try) < 1e-15 * max(1.0, abs(t)):
            raise IntegrationError("step-size underflow", t=t, h=h_try, n_steps=n_steps)

        ks = [k1]
        for i in range(1, 7):
            yi = y + h_try * sum(a * k for a, k in zip(_A[i], ks))
            ks.append(f(t + _C[i] * h_try, yi))
        y_new = y + h_try * sum(b * k for b, k in zip(_B5, ks) if b != 0.0)

        if fixed_step is None:
            err_vec = h_try * sum(e * k for e, k in zip(_ERR, ks) if e != 0.0)
            err = _rms_error(err_vec, y, y_new, rtol, atol)
            if err > 1.0:
                # reject; shrink and retry
                h = h_try * max(0.2, safety * err ** (-1.0 / order))
                n_steps += 1
                continue
            # PI controller (Gustafsson)
            if err == 0.0:
                fac = 5.0
            else:
                fac = safety * err ** (-0.7 / order) * err_prev ** (0.4 / order)
                fac = min(5.0, max(0.2, fac))
            err_prev = max(err, 1e-10)
            h = direction * min(abs(h_try * fac), max_step)
        n_steps += 1
        t = t + h_try if hit_target is None else hit_target
        y = y_new
        k1 = ks[6]  # FSAL: stage 7 is f(t_new, y_new)
        if hit_target is not None:
            snapshots.append((t, y.copy()))
            next_target = targets.pop(0) if targets else None

    return y, snapshots
