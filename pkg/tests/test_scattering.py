import numpy as np
import pytest

from ionring.config import TWO_PI, RingConfig
from ionring.dynamics import RingDynamics
from ionring.scattering import (analyze_window, backward_scatter, flat_window,
                                frequency_intersections, identify_pulses,
                                make_final_pulse, thermality_test)


@pytest.fixture(scope="module")
def free_ring():
    """Almost-homogeneous ring with a wide flat window: free propagation."""
    cfg = RingConfig(n_ions=240, coupling=1.2591, v_min_frac=0.999999,
                     sigma_frac=0.45, interaction="nearest-neighbor")
    return cfg, flat_window(cfg)


def test_window_geometry(bh_config):
    win = flat_window(bh_config)
    x = win.indices / bh_config.n_ions
    sigma = bh_config.sigma
    lo = 1 - sigma + bh_config.gamma2
    hi = sigma - bh_config.gamma1
    assert np.all((x >= lo - 1e-9) | (x <= hi + 1e-9))
    assert win.n_prime == int(round(TWO_PI * bh_config.n_ions / bh_config.v_min))


def test_pulse_single_branch_and_reconstruction(free_ring):
    cfg, win = free_ring
    dth, dthd = make_final_pulse(cfg, s=1, window=win, center_mode=10, width_modes=5)
    spec = analyze_window(win, dth, dthd)
    n_plus, n_minus = spec.kg_norms()
    assert abs(np.sum(n_plus)) / abs(np.sum(n_minus)) < 1e-3
    field, _ = spec.reconstruct()
    ref = dth[win.indices] * win.taper()
    assert np.max(np.abs(field - ref)) < 1e-8 * np.max(np.abs(ref))


def test_pulse_moves_upstream_leftward(free_ring):
    cfg, win = free_ring
    dth, dthd = make_final_pulse(cfg, s=1, window=win, center_mode=10, width_modes=5)
    band = identify_pulses(analyze_window(win, dth, dthd))[0]
    assert band.direction == "upstream"
    assert band.group_velocity_lab < 0.0


def test_centroid_shifts_with_s(free_ring):
    cfg, win = free_ring
    cents = []
    for nc in (8, 12, 16):
        dth, dthd = make_final_pulse(cfg, s=1, window=win, center_mode=nc, width_modes=4)
        cents.append(identify_pulses(analyze_window(win, dth, dthd))[0].centroid_mode)
    assert cents[0] < cents[1] < cents[2]


def test_split_identities(free_ring, rng):
    cfg, win = free_ring
    n_w = win.size
    amp = rng.standard_normal(n_w) + 1j * rng.standard_normal(n_w)
    amp_dot = rng.standard_normal(n_w) + 1j * rng.standard_normal(n_w)
    from ionring.scattering import PulseSpectrum

    spec = PulseSpectrum(win, win.mode_numbers(), win.omega(), amp, amp_dot)
    plus, minus = spec.split_pm()
    np.testing.assert_allclose(plus + minus, amp, atol=1e-12)
    # a pure positive-frequency mode lands entirely in the + part
    k = 7
    amp2 = np.zeros(n_w, complex)
    amp2[k] = 1.0
    spec2 = PulseSpectrum(win, win.mode_numbers(), win.omega(), amp2,
                          -1j * win.omega() * amp2)
    p2, m2 = spec2.split_pm()
    assert abs(p2[k] - 1.0) < 1e-12 and abs(m2[k]) < 1e-12
    # a real standing wave splits 50/50 in norm magnitude
    amp3 = np.zeros(n_w, complex)
    amp3[k] = 1.0
    spec3 = PulseSpectrum(win, win.mode_numbers(), win.omega(), amp3,
                          np.zeros(n_w, complex))
    np3, nm3 = spec3.kg_norms()
    assert np3[k] == pytest.approx(-nm3[k], rel=1e-12)


def test_conjugation_flips_norm_sign(free_ring):
    cfg, win = free_ring
    dth, dthd = make_final_pulse(cfg, s=1, window=win, center_mode=9, width_modes=4)
    a = analyze_window(win, dth, dthd)
    b = analyze_window(win, np.conj(dth), np.conj(dthd))
    na = np.sum(np.concatenate(a.kg_norms()))
    nb = np.sum(np.concatenate(b.kg_norms()))
    assert na == pytest.approx(-nb, rel=1e-9)


def test_vacuum_norms_zero(free_ring):
    cfg, win = free_ring
    spec = analyze_window(win, np.zeros(cfg.n_ions), np.zeros(cfg.n_ions))
    n_plus, n_minus = spec.kg_norms()
    assert np.all(n_plus == 0.0) and np.all(n_minus == 0.0)


def test_free_evolution_conserves_norms(free_ring):
    cfg, win = free_ring
    pulse = make_final_pulse(cfg, s=1, window=win, center_mode=10, width_modes=5)
    res = backward_scatter(cfg, pulse=pulse, t_back=0.08, rtol=1e-10, window=win)
    n0 = np.sum(analyze_window(win, pulse[0], pulse[1]).kg_norms()[1])
    n1 = np.sum(res.early.kg_norms()[1])
    assert abs(n1 - n0) / abs(n0) < 1e-3
    assert np.sum(res.early.kg_norms()[0]) / abs(n0) < 1e-3


def test_time_reversibility(free_ring):
    cfg, win = free_ring
    pulse = make_final_pulse(cfg, s=1, window=win, center_mode=10, width_modes=5)
    dyn = RingDynamics(cfg)
    y0 = np.concatenate(pulse)
    back, _ = dyn.propagate_moments(y0, 0.0, -0.31, rtol=1e-11)
    forth, _ = dyn.propagate_moments(back, -0.31, 0.0, rtol=1e-11)
    assert np.max(np.abs(forth - y0)) / np.max(np.abs(y0)) < 1e-6


def test_intersections_trivial_and_generic():
    cfg = RingConfig(n_ions=200, coupling=1.2591, v_min_frac=5 / 6,
                     sigma_frac=0.375, interaction="nearest-neighbor")
    zero = frequency_intersections(cfg, 0.0, max_fold=0)
    assert any(abs(s.mode_number) < 0.5 for s in zero)
    # generic frequency below omega_max: late + two high-|k| upstream + downstream
    from ionring.dispersion import omega_max

    om, _ = omega_max(cfg)
    sols = frequency_intersections(cfg, -0.4 * om, max_fold=0)
    ups = [s for s in sols if s.direction == "upstream"]
    downs = [s for s in sols if s.direction == "downstream"]
    assert len(ups) >= 3 and len(downs) >= 1


def test_intersections_folding_bloch_regime():
    cfg = RingConfig(n_ions=200, coupling=2.0004, v_min_frac=5 / 6,
                     sigma_frac=0.375, interaction="full-coulomb")
    from ionring.dispersion import omega_max

    om, _ = omega_max(cfg)
    omega0 = -0.4 * om
    unfolded = frequency_intersections(cfg, omega0, max_fold=0)
    folded = frequency_intersections(cfg, omega0, max_fold=1)
    n_prime = int(round(TWO_PI * cfg.n_ions / cfg.v_min))
    high_unfolded = [s for s in unfolded if abs(s.mode_number) > n_prime / 4]
    high_folded = [s for s in folded if abs(s.mode_number) > n_prime / 4 and s.fold != 0]
    assert len(high_folded) >= 2  # the folded high-|k| pair exists
    for s in high_folded:
        assert s.direction == "downstream"


def test_backward_scatter_requires_fitting_pulse(bh_config):
    win = flat_window(bh_config)
    with pytest.raises(ValueError):
        make_final_pulse(bh_config, s=1, window=win, center_mode=6, width_modes=3)


def test_zero_temperature_guard(free_ring):
    cfg, win = free_ring
    pulse = make_final_pulse(cfg, s=1, window=win, center_mode=10, width_modes=5)
    res = backward_scatter(cfg, pulse=pulse, t_back=0.05, rtol=1e-9, window=win)
    rep = thermality_test(res, temperature=1e-9)
    assert rep.n_plus_predicted < 1e-30 or rep.epsilon > 1e3
