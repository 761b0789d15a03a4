"""Forces on the ring and the harmonic stiffness matrix.

Classical equation of motion (m = L = T = 1):

    (1/2 pi) d^2 theta_i / dt^2 = F_i^c + F^e(theta_i, t)

with the tangential Coulomb force between two ions on the ring

    F^c(dtheta) = q * pi^2 sign(sin(dtheta/2)) cos(dtheta/2) / sin^2(dtheta/2)

(q = e^2/4 pi eps0 = C/2N) and the external force F^e chosen so the imposed
trajectories theta_i(t) = g(i/N + t/T) solve the equation exactly.

Linearizing around the equilibrium gives d^2(dtheta)/dt^2 = -K(t) dtheta with
the stiffness matrix assembled here:

    K_ij = -q pi^3 |(1 + cos^2(dth/2)) / sin^3(dth/2)|      (i != j)
    K_ii = -sum_{j != i} K_ij + K^e_i

where K^e_i = -(2 pi) dF^e/dtheta comes from differentiating the external
force along the ring.  For a homogeneous static ring K is circulant and its
spectrum reproduces the nearest-neighbor sound velocity
c(theta)^2 = (2 n(theta)/m) (2 pi/L)^3 q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import TWO_PI, RingConfig
from .profile import GProfile, build_profile, ramp_v_min, ramp_v_min_dt, ramp_v_min_dtt


def coulomb_force_pair(dtheta, charge_sq=1.0):
    """Tangential Coulomb force on the ion at +dtheta/2 from its partner.

    Antisymmetric in dtheta; coincident ions are a domain error.
    """
    dtheta = np.asarray(dtheta, dtype=float)
    s = np.sin(dtheta / 2.0)
    if np.any(s == 0.0):
        raise ValueError("coincident ions: Coulomb force undefined")
    return charge_sq * np.pi**2 * np.sign(s) * np.cos(dtheta / 2.0) / s**2


def coulomb_force_net(angles, index=None, charge_sq=1.0, nearest_neighbor=False):
    """Net tangential Coulomb force on one ion (or all ions) of the ring."""
    angles = np.asarray(angles, dtype=float)
    n = angles.size
    if index is not None:
        if nearest_neighbor:
            others = angles[[(index - 1) % n, (index + 1) % n]]
        else:
            others = np.delete(angles, index)
        return float(np.sum(coulomb_force_pair(angles[index] - others, charge_sq)))
    if nearest_neighbor:
        left = coulomb_force_pair(angles - np.roll(angles, 1), charge_sq)
        right = coulomb_force_pair(angles - np.roll(angles, -1), charge_sq)
        return left + right
    d = angles[:, None] - angles[None, :]
    np.fill_diagonal(d, np.pi)  # placeholder off the singularity
    f = coulomb_force_pair(d, charge_sq)
    np.fill_diagonal(f, 0.0)
    return f.sum(axis=1)


def _trajectory_accel(profile: GProfile, x, v_dot=0.0, v_ddot=0.0):
    """d^2 theta / dt^2 along the imposed trajectory at index coordinate x.

    Includes the ramp terms; the profile pieces are linear in v_min so the
    second v-derivative term vanishes identically.
    """
    acc = profile.g_d2(x)
    if v_dot != 0.0:
        acc = acc + 2.0 * profile.g_d1_dv(x) * v_dot
        # + g_dvv * v_dot^2 == 0 (pieces linear in v_min)
    if v_ddot != 0.0:
        acc = acc + profile.g_dv(x) * v_ddot
    return acc


def external_force(profile: GProfile, config: RingConfig, theta, t=0.0, ramped=False):
    """External tangential force enforcing the imposed equilibrium motion.

    Evaluated at lab angle theta; time enters only through the ramp
    derivatives (the static-profile force is time independent).
    """
    theta = np.asarray(theta, dtype=float)
    x = profile.g_inv(theta)
    if ramped:
        v_dot = float(ramp_v_min_dt(config, t))
        v_ddot = float(ramp_v_min_dtt(config, t))
    else:
        v_dot = v_ddot = 0.0
    inertial = _trajectory_accel(profile, x, v_dot, v_ddot) / TWO_PI
    # Coulomb force on a probe ion at theta from the other N-1 ions riding
    # the same equilibrium pattern
    n = config.n_ions
    offsets = np.arange(1, n) / n
    partners = profile.g(np.add.outer(x, offsets))
    if config.nearest_neighbor:
        partners = partners[..., [0, -1]]
    d = np.asarray(theta)[..., None] - partners
    coul = coulomb_force_pair(d, config.charge_sq).sum(axis=-1)
    return inertial - coul


@dataclass
class ForceMatrix:
    """Stiffness matrix K(t) of the harmonic Hamiltonian, units 1/T^2."""

    matrix: np.ndarray
    time: float
    coulomb_diag: np.ndarray
    external_diag: np.ndarray


def _pair_stiffness(dtheta, charge_sq):
    """|d F^c / d dtheta| scaled: q pi^3 |(1+cos^2(dth/2))/sin^3(dth/2)|."""
    half = np.asarray(dtheta, dtype=float) / 2.0
    s = np.abs(np.sin(half))
    return charge_sq * np.pi**3 * (1.0 + np.cos(half) ** 2) / s**3


def force_matrix(profile: GProfile, config: RingConfig, t=0.0, ramped=False) -> ForceMatrix:
    """Assemble K(t) for the equilibrium configuration at time t."""
    n = config.n_ions
    x = np.arange(n) / n + t
    theta = profile.g(x)
    q = config.charge_sq

    if config.nearest_neighbor:
        d_next = theta - np.roll(theta, -1)
        k_next = -_pair_stiffness(d_next, q)  # coupling (i, i+1)
        kc = np.zeros((n, n))
        idx = np.arange(n)
        kc[idx, (idx + 1) % n] = k_next
        kc[(idx + 1) % n, idx] = k_next
    else:
        iu = np.triu_indices(n, k=1)
        d = theta[iu[0]] - theta[iu[1]]
        vals = -_pair_stiffness(d, q)
        kc = np.zeros((n, n))
        kc[iu] = vals
        kc[(iu[1], iu[0])] = vals

    coulomb_diag = -kc.sum(axis=1)
    k = kc
    k[np.arange(n), np.arange(n)] = coulomb_diag

    ke = external_stiffness(profile, config, t, ramped=ramped)
    k[np.arange(n), np.arange(n)] += ke
    return ForceMatrix(matrix=k, time=float(t), coulomb_diag=coulomb_diag, external_diag=ke)


def external_stiffness(profile: GProfile, config: RingConfig, t=0.0, ramped=False):
    """Diagonal stiffness -(2 pi) dF^e/dtheta at every equilibrium position.

    Closed form: differentiating the imposed-trajectory force along the ring
    gives the jerk term -A'(x)/g'(x) plus the Coulomb gradient corrected by
    the velocity mismatch factor (1 - g'(x_j)/g'(x_i)).
    """
    n = config.n_ions
    x = np.arange(n) / n + t
    if ramped:
        v_dot = float(ramp_v_min_dt(config, t))
        v_ddot = float(ramp_v_min_dtt(config, t))
    else:
        v_dot = v_ddot = 0.0

    jerk = profile.g_d3(x)
    if v_dot != 0.0:
        jerk = jerk + 2.0 * profile.g_d2_dv(x) * v_dot
    if v_ddot != 0.0:
        jerk = jerk + profile.g_d1_dv(x) * v_ddot
    gp = profile.g_d1(x)
    ke = -jerk / gp

    theta = profile.g(x)
    q = config.charge_sq
    if config.nearest_neighbor:
        for shift in (1, n - 1):
            d = theta - np.roll(theta, -shift)
            kc_pair = -_pair_stiffness(d, q)
            ke = ke + kc_pair * (1.0 - np.roll(gp, -shift) / gp)
    else:
        d = theta[:, None] - theta[None, :]
        np.fill_diagonal(d, np.pi)
        kc_pair = -_pair_stiffness(d, q)
        np.fill_diagonal(kc_pair, 0.0)
        ke = ke + (kc_pair * (1.0 - gp[None, :] / gp[:, None])).sum(axis=1)
    return ke


def _nn_diagonals(profile: GProfile, config: RingConfig, t, ramped=False):
    """Nearest-neighbor stiffness as (diagonal, next-neighbor coupling)."""
    n = config.n_ions
    x = np.arange(n) / n + t
    theta = profile.g(x)
    k_next = -_pair_stiffness(theta - np.roll(theta, -1), config.charge_sq)
    ke = external_stiffness(profile, config, t, ramped=ramped)
    diag = -(k_next + np.roll(k_next, 1)) + ke
    return diag, k_next


class StiffnessProvider:
    """Fast K(t) evaluation for time propagation.

    Static profiles have the exact discrete symmetry
    K(t0 + j T/N) = P^j K(t0) P^-j (P the index shift), so for full-Coulomb
    rings the matrix is precomputed on a grid over one micro-period [0, T/N)
    and evaluated by cubic (Catmull-Rom) interpolation plus index rolling;
    matvec/matmat combine per-node BLAS products and never form the rolled
    matrix.  Nearest-neighbor rings use the three-diagonal form directly and
    ramped (formation) dynamics assemble per call.
    """

    def __init__(self, config: RingConfig, ramped=False, cache_nodes=None,
                 ramp_end_factor=8.0, cache_min_ions=400):
        self.config = config
        self.ramped = ramped
        self.ramp_end = ramp_end_factor * config.tau if ramped else -np.inf
        self.static_profile = build_profile(config)
        self._micro = 1.0 / config.n_ions
        if cache_nodes is None:
            # resolve the horizon-crossing time scale 2*gamma*T within the
            # micro-period grid; interpolation error ~ (2 gamma N m)^-4
            sharp = min(config.gamma1, config.gamma2) * config.n_ions
            cache_nodes = int(max(24, min(512, 8 * math.ceil(50.0 / max(sharp, 0.25)))))
        self._cache_nodes = int(cache_nodes)
        self._cache = None
        # below cache_min_ions direct assembly is cheaper than it is accurate
        if not config.nearest_neighbor and config.n_ions >= cache_min_ions:
            self._build_cache()

    def _build_cache(self):
        m = self._cache_nodes
        taus = np.arange(m) / m * self._micro
        n = self.config.n_ions
        mats = np.empty((m, n, n))
        for r, tau in enumerate(taus):
            mats[r] = force_matrix(self.static_profile, self.config, tau).matrix
        self._cache = mats

    def profile_at(self, t):
        if self._is_ramping(t):
            return build_profile(self.config, float(ramp_v_min(self.config, t)))
        return self.static_profile

    def _is_ramping(self, t):
        return self.ramped and t < self.ramp_end

    def matrix(self, t):
        """Dense K(t)."""
        if self._cache is None or self._is_ramping(t) or self.config.nearest_neighbor:
            prof = self.profile_at(t)
            return force_matrix(prof, self.config, t, ramped=self._is_ramping(t)).matrix
        return self._apply(t, np.eye(self.config.n_ions))

    def _interp_nodes(self, t):
        """Cache node indices, Catmull-Rom weights and the shift count for t.

        Node samples that wrap past the micro-period boundary are handled by
        shifting the REQUEST instead: K((j+1)*micro + tau) = shift(K(tau)),
        so the interpolation is done on the unshifted stack with a fractional
        coordinate and the roll count absorbs whole micro-periods.
        """
        m = self._cache_nodes
        micro = self._micro
        j = int(np.floor(t / micro))
        u = (t - j * micro) / micro * m
        i0 = int(np.floor(u))
        s = u - i0
        w = np.array(
            [
                0.5 * (-s + 2 * s**2 - s**3),
                0.5 * (2.0 - 5 * s**2 + 3 * s**3),
                0.5 * (s + 4 * s**2 - 3 * s**3),
                0.5 * (-(s**2) + s**3),
            ]
        )
        nodes = np.array([i0 - 1, i0, i0 + 1, i0 + 2])
        return nodes, w, j

    def _apply(self, t, y):
        """Shared roll/interp plumbing for matvec and matmat."""
        if np.iscomplexobj(y) and not self.config.nearest_neighbor:
            # run the real kernels on interleaved (re, im) columns instead of
            # letting BLAS upcast the cached real matrices to complex
            yc = np.ascontiguousarray(y, dtype=complex)
            flat = yc.view(np.float64)
            cols = flat.reshape(yc.shape[0], -1)
            out = self._apply(t, cols)
            return np.ascontiguousarray(out).view(complex).reshape(yc.shape)
        if self.config.nearest_neighbor:
            prof = self.profile_at(t)
            diag, k_next = _nn_diagonals(prof, self.config, t, ramped=self._is_ramping(t))
            if y.ndim == 1:
                return diag * y + k_next * np.roll(y, -1) + np.roll(k_next, 1) * np.roll(y, 1)
            return (
                diag[:, None] * y
                + k_next[:, None] * np.roll(y, -1, axis=0)
                + (np.roll(k_next, 1))[:, None] * np.roll(y, 1, axis=0)
            )
        if self._cache is None or self._is_ramping(t):
            return self.matrix(t) @ y
        nodes, weights, j = self._interp_nodes(t)
        n = self.config.n_ions
        m = self._cache_nodes
        jr = j % n
        out = None
        for node, w in zip(nodes, weights):
            wrap, r = divmod(node, m)  # wrap = -1, 0 or +1 micro-periods
            sh = (jr + wrap) % n
            yy = np.roll(y, sh, axis=0)
            term = w * (self._cache[r] @ yy)
            term = np.roll(term, -sh, axis=0)
            out = term if out is None else out + term
        return out

    def matvec(self, t, y):
        """K(t) @ y without forming the rolled matrix."""
        return self._apply(t, np.asarray(y))

    def matmat(self, t, ymat):
        """K(t) @ Y for propagator integration."""
        return self._apply(t, np.asarray(ymat))
