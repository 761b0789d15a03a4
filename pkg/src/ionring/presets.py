"""Named parameter sets reproducing the published figures.

Every preset maps to RingConfig fields plus optional per-experiment options
(pulse index, readout times, sweep grids).  `preset(name)` returns
(RingConfig, options dict).
"""

from __future__ import annotations

from .config import RingConfig

V_MIN_DEFAULT = 5.0 / 6.0

PRESETS = {
    # velocity profile and sound speeds (overview figure)
    "fig02-profile": dict(
        config=dict(n_ions=1000, coupling=1.127, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.25, interaction="nearest-neighbor"),
    ),
    # group velocity of the flat subsonic region, both interaction models
    "fig03-dispersion": dict(
        config=dict(n_ions=1000, coupling=1.2591, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.375, interaction="full-coulomb"),
    ),
    # wavenumber-dependent Hawking temperature
    "fig04-hawking": dict(
        config=dict(n_ions=1000, coupling=1.0, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.375, interaction="full-coulomb"),
        options=dict(modes=(1, 2, 3, 4, 5, 6, 7, 8, 9, 10)),
    ),
    # backward pulse scattering, normal regime
    "fig05-scatter": dict(
        config=dict(n_ions=1000, coupling=1.2591, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.375, interaction="full-coulomb"),
        options=dict(s=5, t_back=0.67, snapshots=12),
    ),
    # backward pulse scattering, Bloch-oscillation regime
    "fig06-bloch": dict(
        config=dict(n_ions=1000, coupling=2.0004, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.375, interaction="full-coulomb"),
        options=dict(s=5, t_back=0.51, snapshots=12),
    ),
    # spectrally resolved thermality comparison (nearest-neighbor / full)
    "fig07a-thermality-nn": dict(
        config=dict(n_ions=1000, coupling=1.0, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.375, interaction="nearest-neighbor"),
        options=dict(s=5, t_back=2.0),
    ),
    "fig07b-thermality-fc": dict(
        config=dict(n_ions=1000, coupling=1.0, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.375, interaction="full-coulomb"),
        options=dict(s=5, t_back=0.75),
    ),
    # correlation maps after formation
    "fig08a-correlations-nn": dict(
        config=dict(n_ions=1000, coupling=1.127, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.25, tau_frac=0.05, interaction="nearest-neighbor"),
        options=dict(time=0.5),
    ),
    "fig08b-correlations-fc": dict(
        config=dict(n_ions=1000, coupling=0.2453, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.25, tau_frac=0.05, interaction="full-coulomb"),
        options=dict(time=0.5),
    ),
    # hot initial state: correlations survive, entanglement does not
    "fig09-correlations-hot": dict(
        config=dict(n_ions=1000, coupling=0.2453, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.25, tau_frac=0.05, interaction="full-coulomb"),
        options=dict(time=0.5, t0_in_hawking_units=102.0),
    ),
    # peak height vs Hawking temperature (gamma1 sweeps)
    "fig10a-peak-nn": dict(
        config=dict(n_ions=1000, coupling=1.127, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.25, tau_frac=0.05, interaction="nearest-neighbor"),
        options=dict(gamma1_sweep=(1.0 / 300, 0.005, 0.01, 0.02, 0.05, 0.1), time=0.5),
    ),
    "fig10b-peak-fc": dict(
        config=dict(n_ions=1000, coupling=0.2453, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.25, tau_frac=0.05, interaction="full-coulomb"),
        options=dict(gamma1_sweep=(0.005, 0.01, 0.02, 0.05, 0.1), time=0.5),
    ),
    # entropy of entanglement growth
    "fig11-entropy": dict(
        config=dict(n_ions=1000, coupling=0.2453, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.25, tau_frac=0.05, interaction="full-coulomb"),
        options=dict(times=tuple(round(0.1 * k, 3) for k in range(1, 11))),
    ),
    # logarithmic negativity vs initial temperature
    "fig12-negativity": dict(
        config=dict(n_ions=1000, coupling=0.2453, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.25, tau_frac=0.05, interaction="full-coulomb"),
        options=dict(times=tuple(round(0.1 * k, 3) for k in range(1, 11)),
                     t0_sweep_hawking=(0.0, 3.0, 10.0, 30.0, 100.0, 300.0)),
    ),
    # difference correlations at measurement resolution
    "fig13-difference": dict(
        config=dict(n_ions=1000, coupling=0.2453, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.25, tau_frac=0.05, interaction="full-coulomb"),
        options=dict(time=0.6, delta=50),
    ),
    # stability diagram
    "fig14-stability": dict(
        config=dict(n_ions=100, coupling=1.0, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.25, interaction="full-coulomb"),
        options=dict(couplings="geom:0.05:3.0:21", v_min_fracs="lin:0.55:0.999:15"),
    ),
    # bounded growth of the stable/unstable pair
    "fig15-growth": dict(
        config=dict(n_ions=1000, coupling=0.2453, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.25, interaction="full-coulomb"),
        options=dict(couplings_pair=(0.2453, 0.2446), n_periods=10),
    ),
    # measurement planning, published parameter chain
    "sec5-plan": dict(
        config=dict(n_ions=1000, coupling=0.25, v_min_frac=V_MIN_DEFAULT,
                    sigma_frac=0.25, gamma1=0.02, tau_frac=0.05,
                    interaction="full-coulomb"),
        options=dict(species="Be-9", ion_spacing=2e-6, laser_wavelength=313e-9,
                     delta_index=50,
                     # published rounded chain: omega_rot = 2 pi x 120 kHz,
                     # k_B T_H/hbar = 5/T
                     rotation_period=1.0 / 120e3, pinned_hawking=5.0),
    ),
    # direct phonon detection example
    "sec52-plan-direct": dict(
        config=dict(n_ions=100000, coupling=0.7, v_min_frac=0.99,
                    sigma_frac=0.4917, gamma1=0.002, gamma2=0.002,
                    tau_frac=0.05, interaction="full-coulomb"),
        options=dict(species="Be-9", ion_spacing=2e-6, laser_wavelength=313e-9,
                     n_illuminated=200, t_measure_frac=0.25),
    ),
}


def preset(name):
    if name not in PRESETS:
        known = ", ".join(sorted(PRESETS))
        raise KeyError(f"unknown preset {name!r}; available: {known}")
    entry = PRESETS[name]
    return RingConfig(**entry["config"]), dict(entry.get("options", {}))


def preset_names():
    return sorted(PRESETS)
