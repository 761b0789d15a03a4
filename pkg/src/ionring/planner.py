"""Closed-form planning calculators for a ring-trap measurement campaign.

Physical units enter only here: ion species, ring length, laser wavelength.
Everything else in the package works in the m = L = T = 1 system, so this
module converts a physical parameter set into the dimensionless coupling,
derives the rotation period, Hawking temperature and sound velocities, and
evaluates the published accuracy/repetition bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .config import TWO_PI, RingConfig
from .dispersion import hawking_temperature_lda, lda_group_velocity, NoHorizonError
from .profile import build_profile

# CODATA 2018
HBAR = 1.054_571_817e-34        # J s
K_B = 1.380_649e-23             # J / K
E_CHARGE = 1.602_176_634e-19    # C
EPS0 = 8.854_187_8128e-12       # F / m
ATOMIC_MASS = 1.660_539_066_60e-27  # kg

ION_SPECIES = {
    # mass number -> atomic mass units (charge +e assumed)
    "Be-9": 9.012_1831,
}

COULOMB_CONST = E_CHARGE**2 / (4.0 * math.pi * EPS0)  # e^2/4 pi eps0, J m


@dataclass
class ExperimentPlan:
    """Physical inputs and the derived planning quantities."""

    config: RingConfig
    species: str = "Be-9"
    ion_spacing: float = 2e-6          # L / N, meters
    laser_wavelength: float = 313e-9   # meters
    delta_index: int = 50              # offset for difference correlations
    rotation_period: float | None = None   # seconds; derived from coupling if None
    hawking_temperature: float | None = None  # k_B T_H/hbar in 1/T units; derived if None
    t_measure_frac: float = 0.25       # t_m / T for direct phonon detection
    n_illuminated: int = 200
    derived: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.species not in ION_SPECIES:
            raise ValueError(f"unknown species {self.species!r}; add it to ION_SPECIES")
        self.mass = ION_SPECIES[self.species] * ATOMIC_MASS
        self.ring_length = self.ion_spacing * self.config.n_ions
        # T from e^2/4pi eps0 = C/(2N) m L^3 / T^2 unless pinned
        t_derived = math.sqrt(
            self.config.charge_sq * self.mass * self.ring_length**3 / COULOMB_CONST
        )
        self.period = t_derived if self.rotation_period is None else float(self.rotation_period)
        self.derived["rotation_period_derived"] = t_derived
        self.derived["rotation_period_used"] = self.period
        self.derived["omega_rot_hz"] = 1.0 / self.period
        if self.hawking_temperature is None:
            est = hawking_temperature_lda(self.config)
            self.theta_h = est.temperature  # 1/T units
            self.derived["hawking_source"] = f"lda(mode {est.mode_number})"
        else:
            self.theta_h = float(self.hawking_temperature)
            self.derived["hawking_source"] = "pinned"
        self.derived["hawking_temperature_per_T"] = self.theta_h
        self.derived["hawking_temperature_hz"] = self.theta_h / self.period / TWO_PI

    # -- geometry helpers -----------------------------------------------------

    def flat_velocities(self):
        """(v, c) angular pairs in the flat sub- and supersonic regions, 1/T."""
        cfg = self.config
        out = {}
        for name, v in (("subsonic", cfg.v_min), ("supersonic", cfg.v_max)):
            n_theta = TWO_PI * cfg.n_ions / v
            c = float(lda_group_velocity(cfg, n_theta, cfg.reference_mode))
            out[name] = (v, c)
        return out

    def action_scale(self):
        """hbar T / (m L^2): the dimensionless size of quantum fluctuations."""
        return HBAR * self.period / (self.mass * self.ring_length**2)

    def lamb_dicke_parameter(self):
        """sqrt(hbar/(m N omega_rot)) k; << 2 pi inside the Lamb-Dicke limit."""
        omega_rot = TWO_PI / self.period
        k = TWO_PI / self.laser_wavelength
        return math.sqrt(HBAR / (self.mass * self.config.n_ions * omega_rot)) * k


def required_accuracy(plan: ExperimentPlan):
    """Needed accuracy of the angle-angle difference correlations.

    eps = (2 pi/L)^2 (hbar T/m) (pi^3 D^2 / 4 N^3)
          (k_B T_H/hbar)^2 / ((c_i - v_i)(c_j - v_j)),
    with the velocities in the two flat regions (angular units 1/T).
    """
    cfg = plan.config
    vels = plan.flat_velocities()
    v_i, c_i = vels["subsonic"]
    v_j, c_j = vels["supersonic"]
    denom = (c_i - v_i) * (c_j - v_j)
    if denom == 0.0:
        raise NoHorizonError("a flat region sits exactly at c = v")
    eps = (
        (TWO_PI / plan.ring_length) ** 2
        * (HBAR * plan.period / plan.mass)
        * (math.pi**3 * plan.delta_index**2 / (4.0 * cfg.n_ions**3))
        * plan.theta_h**2
        / abs(denom)
    )
    plan.derived["flat_velocities"] = vels
    plan.derived["required_accuracy"] = eps
    return eps


def repetitions(plan: ExperimentPlan, eps=None):
    """Measurement count bound M > (2 pi/L)^4 k^-4 eps^-2."""
    if eps is None:
        eps = plan.derived.get("required_accuracy") or required_accuracy(plan)
    k = TWO_PI / plan.laser_wavelength
    m = (TWO_PI / plan.ring_length) ** 4 / (k**4 * eps**2)
    plan.derived["repetitions"] = m
    return m


def force_accuracy_bound(plan: ExperimentPlan, eps=None):
    """Relative force accuracy gamma so position errors stay below sqrt(eps).

    |dtheta_i| / gamma <= 2 pi |sigma_frac - sigma|
        + (tau^2/2)(2 pi/L)(q/m)(pi^2/6)(N/L)^2 (v_min_frac^-2 - v_max_frac^-2)
    (the second term is the net Coulomb force from the density mismatch of
    the two flat regions, in physical units).
    """
    if eps is None:
        eps = plan.derived.get("required_accuracy") or required_accuracy(plan)
    cfg = plan.config
    term1 = TWO_PI * abs(cfg.sigma_frac - cfg.sigma)
    q_phys = COULOMB_CONST  # e^2/4 pi eps0, J m
    tau = cfg.tau_frac * plan.period
    dens = cfg.n_ions / plan.ring_length
    mismatch = 1.0 / cfg.v_min_frac**2 - 1.0 / cfg.v_max_frac**2
    term2 = (
        (tau**2 / 2.0)
        * (TWO_PI / plan.ring_length)
        * (q_phys / plan.mass)
        * (math.pi**2 / 6.0)
        * dens**2
        * mismatch
    )
    bound = term1 + term2
    gamma = math.sqrt(eps) / bound
    plan.derived["displacement_bound"] = bound
    plan.derived["displacement_bound_frac"] = bound / TWO_PI
    plan.derived["force_accuracy"] = gamma
    return gamma


def phonon_detection_estimate(plan: ExperimentPlan, occupations, mode_numbers=None,
                              center_mode=None, rabi_phase=math.pi / 2, snr=10.0):
    """Expected excited-ion count for the direct phonon-detection scheme.

    <b^dag b> = sum_p w_p sin^2(Omega_tot t_m) <a_p^dag a_p> with the
    sideband weights w_p = |Omega_p|^2 / sum_q |Omega_q|^2 and
    Omega_p ~ 1/sqrt(omega_p); the measurement noise is
    sigma_m = (k_B T_H / hbar omega_rot)/sqrt(M) and `snr` sets the reported
    sufficient repetition count M = snr^2.
    """
    cfg = plan.config
    occupations = np.asarray(occupations, dtype=float)
    if mode_numbers is None:
        mode_numbers = np.arange(1, occupations.size + 1)
    mode_numbers = np.asarray(mode_numbers)
    if center_mode is None:
        center_mode = int(mode_numbers[np.argmax(occupations)]) if occupations.size else 1
    from .dispersion import mode_frequencies

    omega = mode_frequencies(cfg.n_ions, cfg.coupling, cfg.interaction, mode_numbers)
    omega = np.maximum(np.atleast_1d(omega), 1e-12)
    weights = (1.0 / omega) / np.sum(1.0 / omega)
    excited = float(np.sum(weights * math.sin(rabi_phase) ** 2 * occupations))

    omega_rot = TWO_PI  # 1/T units
    m_needed = snr**2
    sigma_m = plan.theta_h / omega_rot / math.sqrt(m_needed)
    spectral_ok = plan.n_illuminated < cfg.n_ions * plan.t_measure_frac
    lamb_dicke = plan.lamb_dicke_parameter()
    plan.derived["phonon_detection"] = {
        "expected_excited": excited,
        "repetitions_sufficient": m_needed,
        "noise_std": sigma_m,
        "spectral_width_ok": bool(spectral_ok),
        "lamb_dicke_parameter": lamb_dicke,
        "lamb_dicke_ok": bool(lamb_dicke < TWO_PI),
        "center_mode": center_mode,
    }
    return excited, m_needed, sigma_m


def full_plan_report(plan: ExperimentPlan):
    """Evaluate every calculator and return an audit dictionary."""
    eps = required_accuracy(plan)
    m = repetitions(plan, eps)
    gamma = force_accuracy_bound(plan, eps)
    theta = plan.theta_h
    occ = 1.0 / np.expm1(np.arange(1, 11) * TWO_PI / max(theta, 1e-12))
    phonon_detection_estimate(plan, occ)
    report = {
        "inputs": {
            "species": plan.species,
            "ion_spacing_m": plan.ion_spacing,
            "ring_length_m": plan.ring_length,
            "laser_wavelength_m": plan.laser_wavelength,
            "delta_index": plan.delta_index,
            "n_illuminated": plan.n_illuminated,
            "t_measure_frac": plan.t_measure_frac,
            "config": plan.config.as_dict(),
        },
        "required_accuracy": eps,
        "repetitions": m,
        "force_accuracy": gamma,
        "action_scale": plan.action_scale(),
        "derived": plan.derived,
    }
    return report
