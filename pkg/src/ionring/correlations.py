"""Horizon-crossing correlations and entanglement after black-hole formation.

Momentum-momentum correlations C_ij = <dp_i dp_j> T/(hbar m) are read off the
momentum block of the covariance matrix (the quadrature convention makes the
conversion factor unity).  The analytic continuum benchmark is the
1/cosh^2 correlator with surface gravity kappa; entanglement uses the
symplectic spectra of region blocks.

The rigid-rotation gauge mode is excluded from all observables by exact
rank-2 replacement: the evolved canonical pair U(t)(u, 0), U(t)(0, u)
carries the regularized zero-mode occupancy, which is swapped for a
unit-width pure vacuum before any block is extracted.  Observables are
therefore independent of the regularization frequency to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import TWO_PI, RingConfig
from .dispersion import (hawking_temperature_lda, hawking_temperature_nn,
                         lda_group_velocity, sound_velocity_nn)
from .dynamics import (GaussianState, HomogeneousModes, RingDynamics,
                       symplectic_eigenvalues, thermal_state)
from .profile import GProfile, build_profile, equilibrium_positions


# -- zero-mode neutralization ---------------------------------------------------

def neutralize_zero_mode(state: GaussianState, dynamics: RingDynamics,
                         propagator=None, modes: HomogeneousModes | None = None,
                         config: RingConfig | None = None) -> GaussianState:
    """Replace the evolved gauge-pair occupancy with a unit pure vacuum.

    state must be U Gamma0 U^T with Gamma0 a thermal state built by
    `thermal_state`; `propagator` is the same U (identity when omitted).
    """
    cfg = config if config is not None else dynamics.config
    if modes is None:
        modes = HomogeneousModes(cfg)
    zi = modes.zero_index
    occ = modes.occupations(state.meta.get("t0_temp", cfg.t0_temp))[zi]
    omega_reg = cfg.omega_reg
    a = (occ + 0.5) / omega_reg
    b = (occ + 0.5) * omega_reg
    z1, z2 = dynamics.gauge_pair(propagator)
    cov = state.cov - (a - 0.5) * np.outer(z1, z1) - (b - 0.5) * np.outer(z2, z2)
    return GaussianState(state.mean.copy(), cov, state.time, dict(state.meta))


# -- correlation maps -------------------------------------------------------------

@dataclass
class CorrelationMap:
    """Momentum-momentum correlations with region annotations."""

    matrix: np.ndarray
    time: float
    angles: np.ndarray            # equilibrium angle of each ion at `time`
    horizon_angles: tuple         # (black hole, white hole)
    supersonic: np.ndarray        # boolean mask per ion


def correlation_map(state: GaussianState, config: RingConfig,
                    profile: GProfile | None = None) -> CorrelationMap:
    """Extract C_ij from the covariance momentum block."""
    if profile is None:
        profile = build_profile(config)
    n = config.n_ions
    c = state.cov[n:, n:].copy()
    theta = equilibrium_positions(profile, state.time)
    th_bh, th_wh = profile.horizon_angles()
    x = np.mod(np.arange(n) / n + state.time, 1.0)
    supersonic = (x > profile.sigma) & (x < 1.0 - profile.sigma)
    return CorrelationMap(c, state.time, np.mod(theta, TWO_PI), (th_bh, th_wh), supersonic)


def difference_correlation_map(state: GaussianState, config: RingConfig, delta):
    """<(dth_i - dth_{i+D})(dth_j - dth_{j+D})> m/(hbar T) (L/2pi)^2.

    The measurable surrogate for C_ij; equals the q-block difference matrix
    in the dimensionless quadratures.
    """
    n = config.n_ions
    q = state.cov[:n, :n]
    d = int(delta)
    rolled = np.roll(q, -d, axis=1)
    both = np.roll(rolled, -d, axis=0)
    # <(q_i - q_{i+D})(q_j - q_{j+D})> = q_ij - q_{i,j+D} - q_{i+D,j} + q_{i+D,j+D}
    return q - rolled - np.roll(q, -d, axis=0) + both


def analytic_cross_correlation(profile: GProfile, config: RingConfig, theta, theta_p,
                               kappa=None, temperature_mode=None):
    """Continuum 1/cosh^2 benchmark for the cross-horizon correlations.

    Angles are measured from the black-hole horizon; theta and theta_p must
    sit in flat regions on opposite sides (c - v of opposite sign there).
    Returns the dimensionless C value (negative for cross pairs).
    """
    if kappa is None:
        if config.nearest_neighbor:
            kappa = hawking_temperature_nn(profile, config).surface_gravity
        else:
            kappa = hawking_temperature_lda(config, mode_number=temperature_mode,
                                            profile=profile).surface_gravity
    th_bh = profile.horizon_angles()[0]

    def flat_quantities(th):
        v = float(profile.velocity(th))
        if config.nearest_neighbor:
            c = float(sound_velocity_nn(profile, config, th))
        else:
            n_theta = TWO_PI * config.n_ions / v
            c = float(lda_group_velocity(config, n_theta, config.reference_mode))
        dens = config.n_ions / v
        return v, c, dens

    v1, c1, n1 = flat_quantities(theta)
    v2, c2, n2 = flat_quantities(theta_p)
    d1 = c1 - v1
    d2 = c2 - v2
    if d1 == 0.0 or d2 == 0.0:
        raise ValueError("angle sits on the horizon (c = v): correlator singular")
    u1 = (theta - th_bh) / d1
    u2 = (theta_p - th_bh) / d2
    pref = (1.0 / (16.0 * np.pi)) * math.sqrt(c1 * c2 / (n1 * n2)) / (d1 * d2)
    return pref * kappa**2 / math.cosh(0.5 * kappa * (u1 - u2)) ** 2


# -- region partitions -------------------------------------------------------------

@dataclass
class RegionPartition:
    """Two disjoint ion index sets (A inside, B outside)."""

    region_a: np.ndarray
    region_b: np.ndarray
    rule: str

    def __post_init__(self):
        if np.intersect1d(self.region_a, self.region_b).size:
            raise ValueError("regions overlap")


def horizon_bands(config: RingConfig, time, band_frac=0.2, offset_frac=0.01) -> RegionPartition:
    """Bands of band_frac*N ions adjacent to the black-hole horizon.

    Offset by offset_frac*N ions into the flat regions on each side; at time
    t ion i sits at index coordinate frac(i/N + t), so membership moves with
    the rotation while the horizon stays fixed in the lab.
    """
    n = config.n_ions
    sigma = config.sigma
    x = np.mod(np.arange(n) / n + time, 1.0)
    size = band_frac
    off = offset_frac
    inside = (x > sigma + off) & (x <= sigma + off + size)
    outside = (x < sigma - off) & (x >= sigma - off - size)
    return RegionPartition(np.nonzero(inside)[0], np.nonzero(outside)[0],
                           f"bands({band_frac}N, offset {offset_frac}N)")


def sonic_halves(config: RingConfig, time) -> RegionPartition:
    """Whole supersonic region vs whole subsonic region at time t."""
    n = config.n_ions
    sigma = config.sigma
    x = np.mod(np.arange(n) / n + time, 1.0)
    inside = (x > sigma) & (x < 1.0 - sigma)
    return RegionPartition(np.nonzero(inside)[0], np.nonzero(~inside)[0], "sonic-halves")


def _block(cov, idx):
    n = cov.shape[0] // 2
    sel = np.concatenate([idx, idx + n])
    return cov[np.ix_(sel, sel)]


def symplectic_spectrum(gamma_block):
    """Positive halves of the +-paired eigenvalues of i sigma Gamma."""
    return symplectic_eigenvalues(gamma_block)


def entropy_of_entanglement(state: GaussianState, partition: RegionPartition,
                            purity_tol=1e-4):
    """Von Neumann entropy (bits) of region A for a globally pure state.

    S = sum (nu+1/2) log2(nu+1/2) - (nu-1/2) log2(nu-1/2); raises if the
    global state is visibly impure (use log_negativity instead).
    """
    nu_global = symplectic_eigenvalues(state.cov)
    if np.max(np.abs(nu_global - 0.5)) > purity_tol:
        raise ValueError(
            "global state is not pure; the entropy of entanglement is undefined "
            "(use log_negativity for mixed states)"
        )
    nu = symplectic_eigenvalues(_block(state.cov, partition.region_a))
    return float(_entropy_bits(nu))


def _entropy_bits(nu):
    nu = np.asarray(nu)
    nu = np.clip(nu, 0.5, None)
    up = nu + 0.5
    dn = nu - 0.5
    s = up * np.log2(up)
    pos = dn > 0.0
    s[pos] -= dn[pos] * np.log2(dn[pos])
    return np.sum(s)


def region_entropy(cov, idx):
    """Entropy (bits) of an index set regardless of global purity."""
    return float(_entropy_bits(symplectic_eigenvalues(_block(cov, idx))))


def log_negativity(state: GaussianState, partition: RegionPartition):
    """Logarithmic negativity (bits) between regions A and B.

    Partial transposition flips the sign of region-A momenta in the combined
    two-region covariance block; N = -sum_{2 nu < 1} log2(2 nu).
    """
    n = state.n_modes
    idx = np.concatenate([partition.region_a, partition.region_b])
    block = _block(state.cov, idx)
    m = idx.size
    n_a = partition.region_a.size
    signs = np.ones(2 * m)
    signs[m : m + n_a] = -1.0
    pt = block * np.outer(signs, signs)
    nu = symplectic_eigenvalues(pt)
    small = nu[2.0 * nu < 1.0]
    if small.size == 0:
        return 0.0
    return float(-np.sum(np.log2(2.0 * small)))


# -- ridge extraction ---------------------------------------------------------------

@dataclass
class RidgeReport:
    present: bool
    peak_value: float
    peak_pair: tuple
    slope: float
    predicted_slope: float
    noise_floor: float
    points: np.ndarray


def peak_extract(cmap: CorrelationMap, config: RingConfig,
                 partition: RegionPartition | None = None,
                 profile: GProfile | None = None,
                 corridor_frac=0.35, noise_factor=3.0) -> RidgeReport:
    """Locate the negative cross-horizon ridge and fit its slope.

    For every inside-band ion the most negative correlation with the outside
    band is collected; points near the predicted ridge line (within
    corridor_frac of the prediction) are kept, the minimum is the peak, and
    a |C|-weighted least-squares line through the kept points gives the
    slope d theta_out / d theta_in, compared against
    (c_out - v_out)/(c_in - v_in).
    """
    if profile is None:
        profile = build_profile(config)
    if partition is None:
        partition = horizon_bands(config, cmap.time)
    th_bh = cmap.horizon_angles[0]
    a, b = partition.region_a, partition.region_b
    sub = cmap.matrix[np.ix_(a, b)]
    th_a = np.mod(cmap.angles[a] - th_bh + np.pi, TWO_PI) - np.pi
    th_b = np.mod(cmap.angles[b] - th_bh + np.pi, TWO_PI) - np.pi

    def flat(th_sample):
        th_abs = th_bh + th_sample
        v = float(profile.velocity(th_abs))
        if config.nearest_neighbor:
            c = float(sound_velocity_nn(profile, config, th_abs))
        else:
            c = float(lda_group_velocity(config, TWO_PI * config.n_ions / v,
                                         config.reference_mode))
        return c - v

    d_in = flat(float(np.median(th_a)))
    d_out = flat(float(np.median(th_b)))
    predicted_slope = d_out / d_in

    # per-inside-ion minima over the outside band
    j_min = np.argmin(sub, axis=1)
    vals = sub[np.arange(a.size), j_min]
    th_out_min = th_b[j_min]
    predicted = th_a * predicted_slope
    keep = np.abs(th_out_min - predicted) <= corridor_frac * np.maximum(np.abs(predicted), 1e-6)
    noise = noise_factor * float(np.median(np.abs(sub)))
    strong = keep & (vals < -noise)
    if strong.sum() < 3:
        return RidgeReport(False, float(np.min(sub)), (0, 0), math.nan,
                           predicted_slope, noise, np.empty((0, 3)))
    w = -vals[strong]
    xs = th_a[strong]
    ys = th_out_min[strong]
    slope = float(np.sum(w * xs * ys) / np.sum(w * xs * xs))
    k = int(np.argmin(vals[strong]))
    peak = float(vals[strong][k])
    pair = (int(a[strong][k]), int(b[j_min[strong][k]]))
    points = np.column_stack([xs, ys, vals[strong]])
    return RidgeReport(True, peak, pair, slope, predicted_slope, noise, points)


# -- entanglement time series ----------------------------------------------------------

@dataclass
class EntanglementSeries:
    times: np.ndarray
    entropy: np.ndarray | None       # bits, T0 = 0 only
    negativity: dict                 # {t0_temp: array of bits}
    rates: dict                      # fitted post-transient slopes, bits per T
    entropy_rate: float | None
    transient: float
    fit_residual: float | None


def fit_rate(times, values, transient=0.2):
    """Linear fit past the transient; returns (rate, intercept, residual)."""
    times = np.asarray(times)
    values = np.asarray(values)
    sel = times >= transient
    if sel.sum() < 2:
        raise ValueError("not enough post-transient samples")
    t = times[sel]
    y = values[sel]
    a = np.vstack([t, np.ones_like(t)]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    span = max(np.max(y) - np.min(y), 1e-12)
    return float(coef[0]), float(coef[1]), float(np.max(np.abs(resid)) / span)


def entanglement_series(config: RingConfig, times, t0_sweep=(0.0,),
                        partition_rule="bands", transient=0.2, rtol=1e-9,
                        fixed_step=None, dynamics: RingDynamics | None = None,
                        band_frac=0.2, offset_frac=0.01):
    """Entropy (T0=0) and negativity (each T0) across black-hole formation.

    One propagator sequence is shared by the whole temperature sweep; the
    zero mode is neutralized before any block extraction.  The entropy of
    entanglement always partitions the full ring into its supersonic and
    subsonic halves (it needs a pure bipartition); the negativity uses
    `partition_rule`.  Partitions follow the rotation (membership recomputed
    per snapshot time).
    """
    times = np.asarray(sorted(float(t) for t in times))
    if dynamics is None:
        dynamics = RingDynamics(config, ramped=True)
    modes = HomogeneousModes(config)
    n = config.n_ions
    u, snaps = dynamics.propagator(0.0, float(times[-1]), rtol=rtol,
                                   fixed_step=fixed_step, t_eval=list(times))
    u_by_time = {round(ts, 12): us for ts, us in snaps}
    u_by_time[round(float(times[-1]), 12)] = u

    def partition_at(t):
        if partition_rule == "bands":
            return horizon_bands(config, t, band_frac, offset_frac)
        if partition_rule == "halves":
            return sonic_halves(config, t)
        raise ValueError("partition_rule must be 'bands' or 'halves'")

    entropy = None
    entropy_rate = None
    fit_res = None
    negativity = {}
    rates = {}
    base_states = {t0: thermal_state(config, t0_temp=t0, modes=modes) for t0 in t0_sweep}

    for t0 in t0_sweep:
        vals = []
        s_vals = []
        for ts in times:
            us = u_by_time[round(float(ts), 12)]
            cov = us @ base_states[t0].cov @ us.T
            st = GaussianState(np.zeros(2 * n), cov, ts, {"t0_temp": t0})
            st = neutralize_zero_mode(st, dynamics, us, modes)
            vals.append(log_negativity(st, partition_at(ts)))
            if t0 == 0.0:
                s_vals.append(entropy_of_entanglement(st, sonic_halves(config, ts)))
        negativity[t0] = np.asarray(vals)
        rates[t0], _, _ = fit_rate(times, vals, transient)
        if t0 == 0.0:
            entropy = np.asarray(s_vals)
            entropy_rate, _, fit_res = fit_rate(times, entropy, transient)
    return EntanglementSeries(times, entropy, negativity, rates, entropy_rate,
                              transient, fit_res)


def crossover_temperature(series: EntanglementSeries, threshold=1e-3):
    """Smallest sweep T0 whose post-transient negativity growth is below
    threshold bits per period; None when every rate stays above it."""
    for t0 in sorted(series.rates):
        if series.rates[t0] < threshold:
            return t0
    return None
