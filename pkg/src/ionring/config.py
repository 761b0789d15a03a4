"""Model configuration for the rotating-ion-ring phonon simulator.

All quantities are expressed in the nondimensional system m = L = T = 1
(ion mass, ring circumference, rotation period), with hbar = k_B = 1 in the
quadrature convention of :mod:`ionring.dynamics`.  The Coulomb coupling is
entered through the dimensionless number ``coupling`` = C with
e^2/(4 pi eps0) = C/(2N) * m L^3 / T^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace, asdict

TWO_PI = 2.0 * math.pi

NEAREST_NEIGHBOR = "nearest-neighbor"
FULL_COULOMB = "full-coulomb"

_INTERACTION_ALIASES = {
    "nearest-neighbor": NEAREST_NEIGHBOR,
    "nn": NEAREST_NEIGHBOR,
    "full-coulomb": FULL_COULOMB,
    "full": FULL_COULOMB,
    "coulomb": FULL_COULOMB,
}


class ConfigError(ValueError):
    """Invalid configuration; carries the offending field name."""

    def __init__(self, field_name, message):
        self.field_name = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass
class RingConfig:
    """Parameters of the rotating inhomogeneous ion ring.

    n_ions       -- number of ions N
    coupling     -- dimensionless C, e^2/4pi eps0 = C/(2N) m L^3/T^2
    v_min_frac   -- subsonic angular velocity, v_min = 2 pi v_min_frac / T
    sigma_frac   -- horizon angle, sigma * v_min * T = 2 pi * sigma_frac
    gamma1       -- half-width (index fraction) of the black-hole transition
    gamma2       -- half-width (index fraction) of the white-hole transition
    tau_frac     -- formation ramp time constant tau / T
    interaction  -- "nearest-neighbor" or "full-coulomb"
    t0_temp      -- initial temperature, k_B T0 / hbar in units 1/T
    reference_mode -- wavenumber index used for LDA temperatures and group
                    velocities (the k = 2 pi n / L mode with n = reference_mode)
    omega_reg    -- regularization frequency for the rigid-rotation mode,
                    in units 1/T
    """

    n_ions: int
    coupling: float = 1.0
    v_min_frac: float = 5.0 / 6.0
    sigma_frac: float = 0.25
    gamma1: float = 0.02
    gamma2: float = 0.05
    tau_frac: float = 0.05
    interaction: str = FULL_COULOMB
    t0_temp: float = 0.0
    reference_mode: int = 5
    omega_reg: float = 1e-6 * TWO_PI

    def __post_init__(self):
        if self.n_ions < 3:
            raise ConfigError("n_ions", "need at least 3 ions")
        key = str(self.interaction).strip().lower()
        if key not in _INTERACTION_ALIASES:
            raise ConfigError(
                "interaction",
                f"unknown mode {self.interaction!r}; use "
                f"{NEAREST_NEIGHBOR!r} or {FULL_COULOMB!r}",
            )
        self.interaction = _INTERACTION_ALIASES[key]
        if self.coupling <= 0.0:
            raise ConfigError("coupling", "must be positive")
        if not 0.0 < self.v_min_frac <= 1.0:
            raise ConfigError("v_min_frac", "need 0 < v_min_frac <= 1")
        if not 0.0 < self.sigma_frac < 0.5:
            raise ConfigError("sigma_frac", "need 0 < sigma_frac < 1/2")
        if self.gamma1 <= 0.0:
            raise ConfigError("gamma1", "must be positive")
        if self.gamma2 <= 0.0:
            raise ConfigError("gamma2", "must be positive")
        if self.tau_frac <= 0.0:
            raise ConfigError("tau_frac", "must be positive")
        if self.t0_temp < 0.0:
            raise ConfigError("t0_temp", "must be nonnegative")
        if self.omega_reg <= 0.0:
            raise ConfigError("omega_reg", "must be positive")
        sigma = self.sigma
        if sigma - self.gamma1 <= 0.0:
            raise ConfigError("gamma1", "profile pieces overlap: sigma - gamma1 <= 0")
        if sigma + self.gamma1 >= 1.0 - sigma - self.gamma2:
            raise ConfigError(
                "gamma2", "profile pieces overlap: sigma + gamma1 >= 1 - sigma - gamma2"
            )
        if sigma - self.gamma2 <= 0.0:
            raise ConfigError("gamma2", "profile pieces overlap: sigma - gamma2 <= 0")

    # -- derived geometry ---------------------------------------------------

    @property
    def sigma(self):
        """Index-space location of the black-hole transition center."""
        return self.sigma_frac / self.v_min_frac

    @property
    def v_min(self):
        """Final (ramped-down) subsonic angular velocity, rad per T."""
        return TWO_PI * self.v_min_frac

    @property
    def v_max(self):
        """Supersonic angular velocity from ring closure, rad per T."""
        sigma = self.sigma
        return (TWO_PI - 2.0 * sigma * self.v_min) / (1.0 - 2.0 * sigma)

    @property
    def v_max_frac(self):
        return self.v_max / TWO_PI

    @property
    def charge_sq(self):
        """e^2/(4 pi eps0) in units m L^3 / T^2."""
        return self.coupling / (2.0 * self.n_ions)

    @property
    def tau(self):
        return self.tau_frac

    @property
    def nearest_neighbor(self):
        return self.interaction == NEAREST_NEIGHBOR

    def is_homogeneous(self):
        return self.v_min_frac == 1.0

    def with_(self, **kwargs):
        return replace(self, **kwargs)

    def as_dict(self):
        return asdict(self)


def config_from_mapping(mapping):
    """Build a RingConfig from a flat key/value mapping (CLI config files).

    Unknown keys are rejected so typos fail loudly.
    """
    known = RingConfig.__dataclass_fields__
    kwargs = {}
    for key, value in mapping.items():
        if key not in known:
            raise ConfigError(key, "unknown configuration key")
        kwargs[key] = value
    if "n_ions" not in kwargs:
        raise ConfigError("n_ions", "required key missing")
    kwargs["n_ions"] = int(kwargs["n_ions"])
    if "reference_mode" in kwargs:
        kwargs["reference_mode"] = int(kwargs["reference_mode"])
    for key in kwargs:
        if key not in ("n_ions", "reference_mode", "interaction"):
            kwargs[key] = float(kwargs[key])
    return RingConfig(**kwargs)
