import numpy as np
import pytest

from ionring.config import TWO_PI, RingConfig
from ionring.forces import (StiffnessProvider, coulomb_force_net,
                            coulomb_force_pair, external_force, force_matrix)
from ionring.profile import build_profile, ramp_v_min, ramp_v_min_dt, ramp_v_min_dtt


def test_coulomb_pair_basics():
    assert coulomb_force_pair(np.pi) == pytest.approx(0.0, abs=1e-15)
    d = 0.7
    assert coulomb_force_pair(d) == pytest.approx(-coulomb_force_pair(-d))
    with pytest.raises(ValueError):
        coulomb_force_pair(0.0)


def test_homogeneous_ring_net_force_zero():
    cfg = RingConfig(n_ions=24, v_min_frac=1.0)
    th = equil = TWO_PI * np.arange(24) / 24
    net = coulomb_force_net(th, charge_sq=cfg.charge_sq)
    assert np.max(np.abs(net)) < 1e-10 * np.max(np.abs(coulomb_force_pair(TWO_PI / 24)))


def test_homogeneous_static_external_force_zero():
    cfg = RingConfig(n_ions=20, v_min_frac=1.0)
    prof = build_profile(cfg)
    th = TWO_PI * np.arange(20) / 20 + 0.3
    fe = external_force(prof, cfg, th)
    assert np.max(np.abs(fe)) < 1e-10


def _consistency_residual(cfg, t, ramped):
    if ramped:
        prof = build_profile(cfg, float(ramp_v_min(cfg, t)))
        v_dot = float(ramp_v_min_dt(cfg, t))
        v_ddot = float(ramp_v_min_dtt(cfg, t))
    else:
        prof = build_profile(cfg)
        v_dot = v_ddot = 0.0
    x = np.arange(cfg.n_ions) / cfg.n_ions + t
    th = prof.g(x)
    acc = prof.g_d2(x) + 2 * prof.g_d1_dv(x) * v_dot + prof.g_dv(x) * v_ddot
    fc = coulomb_force_net(th, charge_sq=cfg.charge_sq,
                           nearest_neighbor=cfg.nearest_neighbor)
    fe = external_force(prof, cfg, th, t, ramped=ramped)
    res = acc / TWO_PI - fc - fe
    return np.max(np.abs(res)) / max(np.max(np.abs(fc)), np.max(np.abs(acc)) / TWO_PI)


@pytest.mark.parametrize("interaction", ["full-coulomb", "nearest-neighbor"])
def test_equilibrium_consistency_static(interaction):
    cfg = RingConfig(n_ions=36, coupling=1.2591, v_min_frac=5 / 6,
                     sigma_frac=0.25, interaction=interaction)
    assert _consistency_residual(cfg, 0.137, ramped=False) < 1e-8


def test_equilibrium_consistency_during_ramp(bh_config):
    assert _consistency_residual(bh_config, 0.04, ramped=True) < 1e-8


def test_ramped_force_approaches_static(bh_config):
    cfg = bh_config
    t = 12 * cfg.tau
    prof_r = build_profile(cfg, float(ramp_v_min(cfg, t)))
    prof_s = build_profile(cfg)
    th = prof_s.g(np.arange(cfg.n_ions) / cfg.n_ions + t)
    fe_r = external_force(prof_r, cfg, th, t, ramped=True)
    fe_s = external_force(prof_s, cfg, th)
    np.testing.assert_allclose(fe_r, fe_s, rtol=1e-10, atol=1e-10)


def test_static_profile_force_time_independent(bh_config):
    prof = build_profile(bh_config)
    th = np.linspace(0.2, 5.9, 17)
    f1 = external_force(prof, bh_config, th, t=0.0)
    f2 = external_force(prof, bh_config, th, t=0.44)
    np.testing.assert_allclose(f1, f2, rtol=0, atol=1e-12)


def test_force_matrix_symmetry_and_row_sums(bh_config):
    fm = force_matrix(build_profile(bh_config), bh_config, 0.123)
    k = fm.matrix
    coul = k.copy()
    coul[np.diag_indices_from(coul)] = fm.coulomb_diag
    assert np.max(np.abs(coul - coul.T)) == 0.0
    off = coul - np.diag(np.diag(coul))
    np.testing.assert_allclose(off.sum(axis=1), -fm.coulomb_diag, rtol=1e-12)


def test_homogeneous_matrix_circulant():
    cfg = RingConfig(n_ions=30, coupling=1.0, v_min_frac=1.0)
    k = force_matrix(build_profile(cfg), cfg, 0.0).matrix
    shifted = np.roll(np.roll(k, 1, axis=0), 1, axis=1)
    assert np.max(np.abs(k - shifted)) < 1e-12 * np.max(np.abs(k))


def test_linearization_against_finite_differences(bh_config):
    """K must equal -(2 pi) d(total force)/d theta around the equilibrium."""
    cfg = bh_config.with_(n_ions=14)
    prof = build_profile(cfg)
    t = 0.123
    x = np.arange(cfg.n_ions) / cfg.n_ions + t
    th = prof.g(x)
    k = force_matrix(prof, cfg, t).matrix
    eps = 1e-6
    k_fd = np.zeros_like(k)
    for j in range(cfg.n_ions):
        d = np.zeros(cfg.n_ions)
        d[j] = eps
        fp = coulomb_force_net(th + d, charge_sq=cfg.charge_sq) + np.array(
            [float(external_force(prof, cfg, a)) for a in th + d])
        fm = coulomb_force_net(th - d, charge_sq=cfg.charge_sq) + np.array(
            [float(external_force(prof, cfg, a)) for a in th - d])
        k_fd[:, j] = -TWO_PI * (fp - fm) / (2 * eps)
    assert np.max(np.abs(k - k_fd)) < 1e-6 * np.max(np.abs(k))


def test_discrete_translation_symmetry(bh_config):
    prof = build_profile(bh_config)
    n = bh_config.n_ions
    k0 = force_matrix(prof, bh_config, 0.21).matrix
    k1 = force_matrix(prof, bh_config, 0.21 + 1.0 / n).matrix
    shifted = np.roll(np.roll(k0, -1, axis=0), -1, axis=1)
    assert np.max(np.abs(k1 - shifted)) < 1e-10 * np.max(np.abs(k0))


@pytest.mark.parametrize("interaction", ["full-coulomb", "nearest-neighbor"])
def test_provider_matches_direct_assembly_small(interaction, rng):
    """Small rings bypass the cache: exact agreement expected."""
    cfg = RingConfig(n_ions=60, coupling=0.9, v_min_frac=5 / 6, sigma_frac=0.375,
                     interaction=interaction)
    prov = StiffnessProvider(cfg)
    prof = build_profile(cfg)
    y = rng.standard_normal(60)
    ymat = rng.standard_normal((60, 3))
    for t in (0.0, 1.7e-3, 0.25, -0.31, 0.99997):
        k_ref = force_matrix(prof, cfg, t).matrix
        scale = np.max(np.abs(k_ref))
        assert np.max(np.abs(prov.matvec(t, y) - k_ref @ y)) < 1e-11 * scale
        assert np.max(np.abs(prov.matmat(t, ymat) - k_ref @ ymat)) < 1e-11 * scale
        assert np.max(np.abs(prov.matrix(t) - k_ref)) < 1e-11 * scale


def test_provider_cache_interpolation_accuracy(rng):
    """Large full-Coulomb rings use the micro-period cache."""
    cfg = RingConfig(n_ions=450, coupling=0.9, v_min_frac=5 / 6, sigma_frac=0.375,
                     interaction="full-coulomb")
    prov = StiffnessProvider(cfg)
    assert prov._cache is not None
    prof = build_profile(cfg)
    y = rng.standard_normal(450)
    for t in (0.0, 1.7e-3, 0.25, -0.31, 0.99997):
        k_ref = force_matrix(prof, cfg, t).matrix
        ref = k_ref @ y
        assert np.max(np.abs(prov.matvec(t, y) - ref)) < 3e-6 * np.max(np.abs(ref))


def test_provider_ramped_assembly(bh_config, rng):
    prov = StiffnessProvider(bh_config, ramped=True)
    y = rng.standard_normal(bh_config.n_ions)
    t = 0.03
    prof = build_profile(bh_config, float(ramp_v_min(bh_config, t)))
    k_ref = force_matrix(prof, bh_config, t, ramped=True).matrix
    np.testing.assert_allclose(prov.matvec(t, y), k_ref @ y, rtol=1e-12, atol=1e-9)
