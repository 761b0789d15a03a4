"""First- and second-moment dynamics of the phonon field.

State convention: dimensionless quadratures q_i = dtheta_i (L/2pi) sqrt(m/hbar T)
and p_i = dp_i sqrt(T/(hbar m)), i.e. in simulation units q = dtheta/(2 pi),
p = q_dot.  The canonical pair satisfies [q, p] = i, a vacuum mode has
symplectic eigenvalue 1/2, and the momentum block of the covariance matrix is
directly the correlation observable C_ij = <dp_i dp_j> T/(hbar m).

The generator is G(t) = [[0, 1], [-K(t), 0]] acting on (q, p); first moments
follow dxi/dt = G xi and covariances dGamma/dt = G Gamma + Gamma G^T, or
equivalently Gamma -> U Gamma U^T with the propagator U.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TWO_PI, RingConfig
from .forces import StiffnessProvider, force_matrix
from .ode import integrate
from .profile import build_profile


# -- symplectic utilities ----------------------------------------------------

def symplectic_form(n_modes):
    """J = [[0, I], [-I, 0]] in (all q, all p) block ordering."""
    j = np.zeros((2 * n_modes, 2 * n_modes))
    j[:n_modes, n_modes:] = np.eye(n_modes)
    j[n_modes:, :n_modes] = -np.eye(n_modes)
    return j


def symplectic_defect(u):
    """max |U^T J U - J|; zero for exact Hamiltonian flow."""
    n = u.shape[0] // 2
    j = symplectic_form(n)
    return float(np.max(np.abs(u.T @ j @ u - j)))


def symplectic_eigenvalues(gamma):
    """Symplectic spectrum of a covariance block (vacuum mode -> 1/2).

    Uses the Hermitian form i sqrt(G) J sqrt(G), whose eigenvalues are
    exactly +-nu_k; requires gamma symmetric positive semidefinite.
    """
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape[0] != gamma.shape[1]:
        raise ValueError("covariance block must be square")
    if np.max(np.abs(gamma - gamma.T)) > 1e-8 * max(1.0, np.max(np.abs(gamma))):
        raise ValueError("covariance block must be symmetric")
    n = gamma.shape[0] // 2
    w, v = np.linalg.eigh(0.5 * (gamma + gamma.T))
    w = np.clip(w, 0.0, None)
    root = (v * np.sqrt(w)) @ v.T
    m = root @ symplectic_form(n) @ root
    ev = np.linalg.eigvalsh(1j * m)
    nu = np.sort(ev[ev > 0.0])[::-1]
    # pair up: eigenvalues come as +-nu; keep the n positive ones
    return np.sort(nu[:n])


def uncertainty_floor(gamma):
    """Smallest eigenvalue of Gamma + (i/2) J; >= 0 for physical states."""
    n = gamma.shape[0] // 2
    h = gamma + 0.5j * symplectic_form(n)
    return float(np.min(np.linalg.eigvalsh(h)))


def shift_permutation(n, k=1):
    """Index-translation matrix sending component i to i+k (mod n)."""
    p = np.zeros((n, n))
    p[(np.arange(n) + k) % n, np.arange(n)] = 1.0
    return p


# -- states -------------------------------------------------------------------

@dataclass
class GaussianState:
    """First moments (2N) and covariance (2N x 2N) at a given time."""

    mean: np.ndarray
    cov: np.ndarray
    time: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def n_modes(self):
        return self.mean.shape[0] // 2

    def copy(self):
        return GaussianState(self.mean.copy(), self.cov.copy(), self.time, dict(self.meta))


class HomogeneousModes:
    """Orthogonal mode decomposition of the homogeneous ring at rest."""

    def __init__(self, config: RingConfig):
        cfg = config.with_(v_min_frac=1.0) if config.v_min_frac != 1.0 else config
        profile = build_profile(cfg)
        k = force_matrix(profile, cfg, 0.0).matrix
        w2, vecs = np.linalg.eigh(k)
        if np.min(w2) < -1e-6 * max(1.0, np.max(np.abs(w2))):
            raise ValueError(f"unstable homogeneous chain: min omega^2 = {np.min(w2):.3e}")
        self.omega_sq = np.clip(w2, 0.0, None)
        self.omega = np.sqrt(self.omega_sq)
        self.vectors = vecs  # columns are modes
        self.config = cfg
        zero = np.argmin(self.omega)
        self.zero_index = int(zero)

    def occupations(self, t0_temp):
        """Bose-Einstein occupation per mode.

        Zero for T0 = 0; the rigid-rotation mode is always excluded (its
        numerically tiny frequency would otherwise produce an unbounded
        occupation).
        """
        n = np.zeros_like(self.omega)
        if t0_temp > 0.0:
            pos = self.omega > 0.0
            pos[self.zero_index] = False
            x = self.omega[pos] / t0_temp
            n[pos] = 1.0 / np.expm1(np.clip(x, 1e-300, 700.0))
        return n


def thermal_state(config: RingConfig, t0_temp=None, zero_mode_width=None,
                  modes: HomogeneousModes | None = None) -> GaussianState:
    """Thermal (or ground) state of phonons around the homogeneous ring.

    Mode decomposition with Bose-Einstein occupations; <q q> and <p p> blocks
    diagonal in the mode basis, cross block zero, first moments zero.  The
    rigid-rotation mode (omega = 0) is assigned the vacuum width of the
    regularization frequency config.omega_reg, or the explicit
    ``zero_mode_width`` pair (q_var, p_var).
    """
    if modes is None:
        modes = HomogeneousModes(config)
    t0 = config.t0_temp if t0_temp is None else float(t0_temp)
    occ = modes.occupations(t0)
    omega = modes.omega.copy()
    zi = modes.zero_index
    if zero_mode_width is None:
        omega_reg = config.omega_reg
        qv0 = (occ[zi] + 0.5) / omega_reg
        pv0 = (occ[zi] + 0.5) * omega_reg
    else:
        qv0, pv0 = zero_mode_width
    with np.errstate(divide="ignore"):
        q_var = (occ + 0.5) / omega
        p_var = (occ + 0.5) * omega
    q_var[zi] = qv0
    p_var[zi] = pv0
    v = modes.vectors
    n = omega.size
    cov = np.zeros((2 * n, 2 * n))
    cov[:n, :n] = (v * q_var) @ v.T
    cov[n:, n:] = (v * p_var) @ v.T
    return GaussianState(np.zeros(2 * n), cov, 0.0, {"t0_temp": t0})


def harmonic_validity(config: RingConfig, action_scale, n_bar=None):
    """Ratio of the position spread to the ion spacing.

    ``action_scale`` is the physical ratio hbar T / (m L^2) that sets the
    absolute size of quantum fluctuations; the typical mode frequency is
    N * omega_rot.  Returns (ratio, valid) where valid means ratio < 1.
    """
    n = config.n_ions
    omega_typ = n * TWO_PI
    if n_bar is None:
        t0 = config.t0_temp
        n_bar = 1.0 / np.expm1(TWO_PI / t0) if t0 > 0 else 0.0
    spread = TWO_PI * np.sqrt(action_scale / omega_typ) * (n_bar + 0.5)
    ratio = spread * n / TWO_PI
    return float(ratio), bool(ratio < 1.0)


# -- generators and propagation ------------------------------------------------

def generator(profile, config: RingConfig, t=0.0, ramped=False):
    """Dense 2N x 2N generator G(t) = [[0, I], [-K(t), 0]]."""
    n = config.n_ions
    k = force_matrix(profile, config, t, ramped=ramped).matrix
    g = np.zeros((2 * n, 2 * n))
    g[:n, n:] = np.eye(n)
    g[n:, :n] = -k
    return g


class RingDynamics:
    """Time evolution driven by a StiffnessProvider.

    Provides first-moment propagation (real or complex), covariance
    propagation (direct ODE or via the propagator), and dense propagators
    over arbitrary spans, with the micro-period shift composition for static
    profiles.
    """

    def __init__(self, config: RingConfig, ramped=False, provider=None):
        self.config = config
        self.provider = provider if provider is not None else StiffnessProvider(config, ramped=ramped)
        self.ramped = ramped

    # dy/dt for y = (q, p) stacked; y may be (2N,) or (2N, k)
    def _rhs(self, t, y):
        n = self.config.n_ions
        q, p = y[:n], y[n:]
        dq = p
        dp = -self.provider.matvec(t, q) if q.ndim == 1 else -self.provider.matmat(t, q)
        return np.concatenate([dq, dp], axis=0)

    def suggest_fixed_step(self, safety=0.35):
        """Step from the spectral radius of K at t=0 (hw <= safety)."""
        k0 = self.provider.matrix(0.0)
        w_max = float(np.sqrt(max(np.max(np.linalg.eigvalsh(k0)), 1e-30)))
        return safety / w_max

    def propagate_moments(self, mean, t0, t1, rtol=1e-9, atol=None, t_eval=None,
                          fixed_step=None):
        """Evolve first moments; returns (mean(t1), snapshots)."""
        return integrate(self._rhs, t0, t1, mean, rtol=rtol, atol=atol,
                         t_eval=t_eval, fixed_step=fixed_step)

    def propagator(self, t0, t1, rtol=1e-10, atol=None, fixed_step=None, t_eval=None):
        """Dense symplectic propagator U(t0 -> t1), optionally with snapshots."""
        n = self.config.n_ions
        u0 = np.eye(2 * n)
        u, snaps = integrate(self._rhs, t0, t1, u0, rtol=rtol, atol=atol,
                             fixed_step=fixed_step, t_eval=t_eval)
        return u, snaps

    def micro_propagator(self, rtol=1e-10, fixed_step=None):
        """Propagator over one micro-period [0, T/N] (static profile)."""
        if self.ramped:
            raise ValueError("micro-period composition needs a static profile")
        micro = 1.0 / self.config.n_ions
        u, _ = self.propagator(0.0, micro, rtol=rtol, fixed_step=fixed_step)
        return u

    def period_propagator(self, rtol=1e-10, fixed_step=None, direct=False):
        """U over one rotation period T.

        Static profiles compose U(T) = (S U(T/N))^N with the index shift S
        (binary powering); `direct` integrates over [0, T] instead (always
        used for ramped dynamics).
        """
        n = self.config.n_ions
        if direct or self.ramped:
            u, _ = self.propagator(0.0, 1.0, rtol=rtol, fixed_step=fixed_step)
            return u
        u_micro = self.micro_propagator(rtol=rtol, fixed_step=fixed_step)
        s = shift_permutation(n, 1)
        s2 = np.zeros((2 * n, 2 * n))
        s2[:n, :n] = s
        s2[n:, n:] = s
        return np.linalg.matrix_power(s2 @ u_micro, n)

    def propagate_state(self, state: GaussianState, t1, rtol=1e-9, atol=None,
                        method="propagator", fixed_step=None, t_eval=None):
        """Evolve a Gaussian state to time t1.

        method "propagator": one dense U, applied as U Gamma U^T (snapshots
        reuse intermediate propagators); "direct": integrates the covariance
        ODE dGamma/dt = G Gamma + Gamma G^T together with the moments.
        """
        t0 = state.time
        if method == "propagator":
            u, snaps = self.propagator(t0, t1, rtol=rtol, atol=atol,
                                       fixed_step=fixed_step, t_eval=t_eval)
            out = []
            for ts, us in snaps:
                out.append(GaussianState(us @ state.mean, us @ state.cov @ us.T, ts, dict(state.meta)))
            final = GaussianState(u @ state.mean, u @ state.cov @ u.T, t1, dict(state.meta))
            return final, out
        if method != "direct":
            raise ValueError("method must be 'propagator' or 'direct'")

        n = self.config.n_ions

        def rhs(t, z):
            mean = z[: 2 * n]
            gam = z[2 * n :].reshape(2 * n, 2 * n)
            dmean = self._rhs(t, mean)
            gq = gam[:n, :]
            gp = gam[n:, :]
            kgq = self.provider.matmat(t, gq)
            ggam = np.vstack([gp, -kgq])  # G @ Gamma
            dgam = ggam + ggam.T
            return np.concatenate([dmean, dgam.ravel()])

        z0 = np.concatenate([state.mean, state.cov.ravel()])
        z1, snaps = integrate(rhs, t0, t1, z0, rtol=rtol, atol=atol,
                              fixed_step=fixed_step, t_eval=t_eval)
        out = [
            GaussianState(z[: 2 * n], z[2 * n :].reshape(2 * n, 2 * n), ts, dict(state.meta))
            for ts, z in snaps
        ]
        final = GaussianState(z1[: 2 * n], z1[2 * n :].reshape(2 * n, 2 * n), t1, dict(state.meta))
        return final, out

    def gauge_pair(self, u=None):
        """The rigid-rotation canonical pair, optionally evolved by U."""
        n = self.config.n_ions
        e = np.ones(n) / np.sqrt(n)
        z1 = np.concatenate([e, np.zeros(n)])
        z2 = np.concatenate([np.zeros(n), e])
        if u is not None:
            z1 = u @ z1
            z2 = u @ z2
        return z1, z2
