"""Homogeneous-chain dispersion, sound velocities and Hawking temperatures.

All velocities are angular (rad per rotation period T); wavenumbers are
labeled by the integer mode index n of k = 2 pi n / L, so a mode's angular
phase velocity is omega/n and the Doppler-shifted lab frequency is
omega_lab = n*v +- omega(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import TWO_PI, RingConfig, NEAREST_NEIGHBOR
from .profile import GProfile, build_profile


class NoHorizonError(RuntimeError):
    """The flow never crosses the local sound velocity."""


class UnstableChainError(RuntimeError):
    def __init__(self, message, mode=None):
        super().__init__(message)
        self.mode = mode


def _pair_couplings(n_ions, charge_sq, nearest_neighbor):
    """|K_d| for pair separations d = 1 .. N//2, with pair multiplicity.

    Both ring directions are folded together so the dispersion extends
    smoothly off the integer mode grid: weight 2 for d < N/2, 1 for the
    antipode d = N/2 when N is even.
    """
    d = np.arange(1, n_ions // 2 + 1)
    half = np.pi * d / n_ions
    vals = charge_sq * np.pi**3 * (1.0 + np.cos(half) ** 2) / np.abs(np.sin(half)) ** 3
    if nearest_neighbor:
        vals[1:] = 0.0
    mult = np.full(d.size, 2.0)
    if n_ions % 2 == 0:
        mult[-1] = 1.0
    return d, vals * mult


def mode_frequencies(n_ions, coupling, interaction=NEAREST_NEIGHBOR, mode_numbers=None):
    """Comoving frequencies omega(n) of the homogeneous ring.

    omega^2(n) = sum_d m_d |K_d| (1 - cos(2 pi n d / N)) over pair
    separations; agrees with the circulant eigenvalues at integer n and
    extends smoothly to fractional wavenumbers (window-DFT bins).
    """
    charge_sq = coupling / (2.0 * n_ions)
    d, vals = _pair_couplings(n_ions, charge_sq, interaction == NEAREST_NEIGHBOR)
    if mode_numbers is None:
        mode_numbers = np.arange(n_ions // 2 + 1)
    nmodes = np.atleast_1d(np.asarray(mode_numbers, dtype=float))
    w2 = (1.0 - np.cos(TWO_PI * np.outer(nmodes, d) / n_ions)) @ vals
    w2 = w2.ravel()
    if np.any(w2 < -1e-9 * np.max(np.abs(w2))):
        bad = int(nmodes[int(np.argmin(w2))])
        raise UnstableChainError(f"negative omega^2 at mode {bad}", mode=bad)
    out = np.sqrt(np.clip(w2, 0.0, None))
    if np.isscalar(mode_numbers) or np.asarray(mode_numbers).ndim == 0:
        return float(out[0])
    return out


@dataclass
class DispersionTable:
    """Frequencies and group velocities of a homogeneous ring."""

    n_ions: int
    coupling: float
    interaction: str
    mode_numbers: np.ndarray
    omega: np.ndarray
    group_velocity: np.ndarray  # angular units, d omega / d n

    def omega_at(self, n):
        return mode_frequencies(self.n_ions, self.coupling, self.interaction, n)

    def group_velocity_at(self, n, dn=1.0):
        wp = self.omega_at(np.asarray(n, dtype=float) + dn)
        wm = self.omega_at(np.asarray(n, dtype=float) - dn)
        return (wp - wm) / (2.0 * dn)


def homogeneous_modes(n_ions, coupling, interaction=NEAREST_NEIGHBOR, max_mode=None) -> DispersionTable:
    """Dispersion table over the positive half zone of a homogeneous ring.

    Group velocities use the symmetric difference over adjacent discrete
    modes; omega(0) = 0 and omega(-n) = omega(n) by construction.
    """
    if max_mode is None:
        max_mode = n_ions // 2
    modes = np.arange(0, max_mode + 1)
    omega = mode_frequencies(n_ions, coupling, interaction, modes)
    wp = mode_frequencies(n_ions, coupling, interaction, modes + 1)
    wm = mode_frequencies(n_ions, coupling, interaction, np.abs(modes - 1))
    wm = np.where(modes >= 1, wm, -wm)  # omega(-1) branch for the n=0 entry
    group = (wp - wm) / 2.0
    return DispersionTable(n_ions, coupling, interaction, modes, omega, group)


def sound_velocity_nn(profile: GProfile, config: RingConfig, theta):
    """Nearest-neighbor sound velocity c(theta), angular units.

    c^2 = (2 n(theta)/m) (2 pi/L)^3 e^2/(4 pi eps0) with the local density
    n(theta) = N / (v(theta) T); c is proportional to v^(-1/2).
    """
    v = profile.velocity(theta)
    dens = config.n_ions / v
    return np.sqrt(2.0 * dens * TWO_PI**3 * config.charge_sq)


@dataclass
class HawkingEstimate:
    """Per-wavenumber Hawking temperature and horizon location."""

    mode_number: int | None
    theta_h: float
    temperature: float  # k_B T_H / hbar, units 1/T
    surface_gravity: float  # kappa = 2 pi k_B T_H / hbar
    meta: dict = field(default_factory=dict)


def _bisect(fun, lo, hi, iters=200):
    flo = fun(lo)
    fhi = fun(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise NoHorizonError("no sign change in bracket")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0.0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
        if hi - lo < 1e-15 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def hawking_temperature_nn(profile: GProfile, config: RingConfig) -> HawkingEstimate:
    """Closed-form temperature at the black-hole horizon, nearest-neighbor.

    k_B T_H / hbar = 3/(4 pi T) * g''(x_H) / g'(x_H) at the x where the flow
    crosses the local sound velocity; raises NoHorizonError when the ring is
    globally sub- or supersonic.
    """

    def excess(x):
        v = profile.g_d1(x)
        c = math.sqrt(2.0 * config.n_ions / v * TWO_PI**3 * config.charge_sq)
        return v - c

    sigma, g1 = profile.sigma, profile.gamma1
    x_h = _bisect(excess, sigma - g1, sigma + g1)
    temp = 3.0 / (4.0 * np.pi) * profile.g_d2(x_h) / profile.g_d1(x_h)
    if temp < 0.0:
        raise NoHorizonError("white-hole-side crossing only")
    return HawkingEstimate(None, float(profile.g(x_h)), float(temp),
                           float(TWO_PI * temp), {"x_h": float(x_h)})


def local_ion_count(profile: GProfile, config: RingConfig, x):
    """Homogeneous-ring ion count matching the local density at x."""
    return TWO_PI * config.n_ions / profile.g_d1(x)


def lda_group_velocity(config: RingConfig, n_theta, mode_number):
    """Group velocity c(N_theta, k) of the density-matched homogeneous ring."""
    n_round = int(round(float(n_theta)))
    wp = mode_frequencies(n_round, config.coupling * n_round / config.n_ions,
                          config.interaction, mode_number + 1)
    wm = mode_frequencies(n_round, config.coupling * n_round / config.n_ions,
                          config.interaction, mode_number - 1)
    return (wp - wm) / 2.0


def hawking_temperature_lda(config: RingConfig, mode_number=None,
                            profile: GProfile | None = None) -> HawkingEstimate:
    """Wavenumber-resolved temperature via the local density approximation.

    The local sound velocity is the group velocity of a homogeneous ring
    whose ion count matches the local density; the horizon is where it
    crosses the flow, and the density derivative of c supplies the
    dispersion correction to the surface gravity:

        k_B T_H(k)/hbar = (1/2 pi T) (g''/g') (1 + (N_theta/v) dc/dN_theta)|_H
    """
    if profile is None:
        profile = build_profile(config)
    n = config.reference_mode if mode_number is None else int(mode_number)

    def excess(x):
        v = profile.g_d1(x)
        n_theta = local_ion_count(profile, config, x)
        return v - lda_group_velocity(config, n_theta, n)

    sigma, g1 = profile.sigma, profile.gamma1
    x_h = _bisect(excess, sigma - g1, sigma + g1)
    v_h = float(profile.g_d1(x_h))
    n_h = local_ion_count(profile, config, x_h)
    n_round = int(round(n_h))
    dc = lda_group_velocity(config, n_round + 1, n) - lda_group_velocity(config, n_round, n)
    correction = 1.0 + (n_round / v_h) * dc
    temp = (1.0 / TWO_PI) * (profile.g_d2(x_h) / v_h) * correction
    if temp < 0.0:
        raise NoHorizonError("white-hole-side crossing only")
    return HawkingEstimate(n, float(profile.g(x_h)), float(temp),
                           float(TWO_PI * temp),
                           {"x_h": float(x_h), "n_theta": n_round, "dc_dn": float(dc)})


def omega_max(config: RingConfig, v=None, region_ion_count=None):
    """Largest comoving-over-Doppler frequency max_k (D(k) - v k L / 2 pi).

    Negative or zero means the region is fully supersonic for every mode.
    Uses the renormalized ion count of the flat subsonic region by default.
    """
    if v is None:
        v = config.v_min
    if region_ion_count is None:
        region_ion_count = int(round(TWO_PI * config.n_ions / v))
    coupling = config.coupling * region_ion_count / config.n_ions
    modes = np.arange(1, region_ion_count // 2 + 1)
    omega = mode_frequencies(region_ion_count, coupling, config.interaction, modes)
    lab = omega - v * modes
    best = int(np.argmax(lab))
    return float(lab[best]), int(modes[best])


def sonic_classification(config: RingConfig, profile: GProfile | None = None):
    """'subsonic', 'supersonic' or 'mixed' for the whole ring.

    Uses the LDA group velocity at the reference mode; the flat plateaus are
    the extremes of v, so both are checked.
    """
    if profile is None:
        profile = build_profile(config)
    n = config.reference_mode

    def excess(v):
        n_theta = TWO_PI * config.n_ions / v
        return v - lda_group_velocity(config, n_theta, n)

    e_min = excess(profile.v_now)
    e_max = excess(profile.v_max)
    if e_min < 0.0 and e_max < 0.0:
        return "subsonic"
    if e_min > 0.0 and e_max > 0.0:
        return "supersonic"
    return "mixed"
