"""Floquet stability of the rotating ring.

The one-period propagator U(T) of the periodic linearized dynamics (static
profile) is assembled from the micro-period propagator via the discrete
space-time translation symmetry, U(T) = (S U(T/N))^N, and its multiplier
spectrum decides stability: mu = max |eigenvalue| > 1 means exponential
growth, with multipliers arriving in (lambda, 1/lambda*) symplectic pairs so
mu >= 1 always.  Bounded transient growth is tracked by the largest
eigenvalue of U(nT)^dagger U(nT).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import RingConfig
from .dispersion import sonic_classification
from .dynamics import RingDynamics, symplectic_defect


@dataclass
class Monodromy:
    propagator: np.ndarray
    mu: float
    multipliers: np.ndarray
    defect: float
    method: str


def monodromy(config: RingConfig, rtol=1e-10, fixed_step=None, direct=False,
              ramped=False, want_multipliers=True) -> Monodromy:
    """One-period propagator and its multiplier spectrum.

    Static profiles compose the micro-period propagator through the shift
    symmetry; `direct` (or ramped formation dynamics, which breaks the
    symmetry) integrates over the full period instead.
    """
    dyn = RingDynamics(config, ramped=ramped)
    if fixed_step is None:
        fixed_step = dyn.suggest_fixed_step(0.2)
    u = dyn.period_propagator(rtol=rtol, fixed_step=fixed_step, direct=direct or ramped)
    if want_multipliers:
        lam = np.linalg.eigvals(u)
        mu = float(np.max(np.abs(lam)))
    else:
        lam = np.empty(0, dtype=complex)
        mu = float(_power_norm(u))
    return Monodromy(u, mu, lam, symplectic_defect(u), "direct" if (direct or ramped) else "composed")


def _power_norm(u, iters=60, seed=7):
    """Largest singular value by power iteration on U^T U."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(u.shape[1])
    v /= np.linalg.norm(v)
    s = 0.0
    for _ in range(iters):
        w = u.T @ (u @ v)
        s_new = float(np.linalg.norm(w))
        v = w / s_new
        if abs(s_new - s) < 1e-12 * s_new:
            s = s_new
            break
        s = s_new
    return math.sqrt(s)


@dataclass
class StabilityPoint:
    coupling: float
    v_min_frac: float
    mu: float
    log_mu_excess: float     # log10(mu - 1), floored
    sonic_class: str
    failed: bool = False


def stability_scan(couplings, v_min_fracs, template: RingConfig,
                   rtol=1e-9, floor=1e-14, progress=None):
    """log(mu - 1) over a (coupling, v_min_frac) grid.

    Per-point failures are recorded and the scan continues; identical grids
    and tolerances give bit-identical results (fixed-step integration from a
    deterministic spectral-radius estimate).
    """
    points = []
    for c in couplings:
        for vf in v_min_fracs:
            try:
                cfg = template.with_(coupling=float(c), v_min_frac=float(vf))
                mono = monodromy(cfg, rtol=rtol)
                excess = max(mono.mu - 1.0, floor)
                points.append(StabilityPoint(float(c), float(vf), mono.mu,
                                             math.log10(excess),
                                             sonic_classification(cfg)))
            except Exception:
                points.append(StabilityPoint(float(c), float(vf), math.nan,
                                             math.nan, "error", failed=True))
            if progress is not None:
                progress(points[-1])
    return points


def bounded_growth(config: RingConfig, n_periods, rtol=1e-10, fixed_step=None,
                   mono: Monodromy | None = None):
    """nu(n) = largest eigenvalue of U(nT)^dagger U(nT), n = 1 .. n_periods.

    nu bounds the growth of any observable; for unstable systems
    log nu(n) -> 2 n log mu once the exponential branch dominates.
    """
    if mono is None:
        mono = monodromy(config, rtol=rtol, fixed_step=fixed_step, want_multipliers=False)
    u_t = mono.propagator
    u_n = np.eye(u_t.shape[0])
    out = []
    for _ in range(int(n_periods)):
        u_n = u_t @ u_n
        out.append(_power_norm(u_n) ** 2)
    return np.asarray(out), mono
