"""Equilibrium motion of the ring: the position map g and its derivatives.

The classical equilibrium trajectories are theta_i(t) = g(i/N + t/T) with a
piecewise velocity profile: two flat plateaus (subsonic at v_min, supersonic
at v_max) joined by quintic-smoothed transitions of half-width gamma1
(black-hole horizon) and gamma2 (white-hole horizon).  g is C^3 because the
smoothing polynomial h satisfies h(+-1) = +-1, h'(+-1) = h''(+-1) = 0, and
g(1) = 2 pi holds identically because h is odd.

Everything here is analytic: g, g', g'', g''', the partial derivatives with
respect to the instantaneous v_min (the profile pieces are linear in v_min,
so second v-derivatives vanish), and the Gaussian formation ramp.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .config import TWO_PI, RingConfig, ConfigError


def _scalar_ok(method):
    """Let piecewise evaluators accept scalars (internals need >= 1-d)."""

    @functools.wraps(method)
    def wrapper(self, x):
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            return method(self, arr.reshape(1))[0]
        return method(self, arr)

    return wrapper


def h_poly(s):
    """Quintic smoothing polynomial, odd, h(+-1)=+-1, h'=h''=0 at +-1."""
    s = np.asarray(s)
    return 15.0 / 8.0 * s - 5.0 / 4.0 * s**3 + 3.0 / 8.0 * s**5


def h_poly_d1(s):
    s = np.asarray(s)
    return 15.0 / 8.0 * (1.0 - s**2) ** 2


def h_poly_d2(s):
    s = np.asarray(s)
    return -15.0 / 2.0 * s * (1.0 - s**2)


def h_poly_int(s):
    """Integral of h from -1 to s."""
    s = np.asarray(s)
    anti = 15.0 / 16.0 * s**2 - 5.0 / 16.0 * s**4 + 1.0 / 16.0 * s**6
    return anti - 11.0 / 16.0


def ramp_v_min(config: RingConfig, t):
    """Instantaneous subsonic velocity during Gaussian black-hole formation.

    v_min(t) = v_min + (2 pi - v_min) exp(-(t/tau)^2); the time derivative
    vanishes at t = 0 so the formation starts smoothly from the homogeneous
    ring.
    """
    v_inf = config.v_min
    return v_inf + (TWO_PI - v_inf) * np.exp(-((np.asarray(t) / config.tau) ** 2))


def ramp_v_min_dt(config: RingConfig, t):
    t = np.asarray(t)
    tau = config.tau
    return (TWO_PI - config.v_min) * np.exp(-((t / tau) ** 2)) * (-2.0 * t / tau**2)


def ramp_v_min_dtt(config: RingConfig, t):
    t = np.asarray(t)
    tau = config.tau
    gauss = np.exp(-((t / tau) ** 2))
    return (TWO_PI - config.v_min) * gauss * (4.0 * t**2 / tau**4 - 2.0 / tau**2)


@dataclass
class GProfile:
    """Piecewise-analytic position map for one value of v_min.

    The five pieces of g'(x) are parametrized by (sigma, gamma1, gamma2) in
    index space and are linear in the instantaneous v_min; `v_now` is the
    velocity the profile was built with (equal to config.v_min for the static
    black-hole profile, 2 pi for the homogeneous ring).
    """

    config: RingConfig
    v_now: float

    def __post_init__(self):
        cfg = self.config
        v = float(self.v_now)
        if not 0.0 < v <= TWO_PI:
            raise ConfigError("v_min", "need 0 < v_min <= 2 pi / T")
        sigma, g1, g2 = cfg.sigma, cfg.gamma1, cfg.gamma2
        one_m_2s = 1.0 - 2.0 * sigma
        v_max = (TWO_PI - 2.0 * sigma * v) / one_m_2s
        if v_max < v:
            raise ConfigError("v_min_frac", "v_max < v_min; no supersonic plateau")
        self.sigma = sigma
        self.gamma1 = g1
        self.gamma2 = g2
        self.v_max = v_max
        self.alpha = (v_max - v) / 2.0  # = (2 pi - v) / (2 (1 - 2 sigma))
        self.beta = (v_max + v) / 2.0
        # partial derivatives of the piece parameters w.r.t. v_min
        self.dv_max = -2.0 * sigma / one_m_2s
        self.dalpha = -0.5 / one_m_2s
        self.dbeta = (1.0 - 4.0 * sigma) / (2.0 * one_m_2s)
        # piece boundaries in x (left edge of each of the five pieces)
        self.x_nodes = (
            0.0,
            sigma - g1,
            sigma + g1,
            1.0 - sigma - g2,
            1.0 - sigma + g2,
            1.0,
        )
        # cumulative g at the piece boundaries (closed form)
        v_min = v
        g_at = [0.0]
        g_at.append(g_at[-1] + v_min * (sigma - g1))
        g_at.append(g_at[-1] + 2.0 * g1 * self.beta)
        g_at.append(g_at[-1] + v_max * (1.0 - 2.0 * sigma - g1 - g2))
        g_at.append(g_at[-1] + 2.0 * g2 * self.beta)
        g_at.append(g_at[-1] + v_min * (sigma - g2))
        self.g_nodes = tuple(g_at)
        # same for dg/dv
        dg_at = [0.0]
        dg_at.append(dg_at[-1] + (sigma - g1))
        dg_at.append(dg_at[-1] + 2.0 * g1 * self.dbeta)
        dg_at.append(dg_at[-1] + self.dv_max * (1.0 - 2.0 * sigma - g1 - g2))
        dg_at.append(dg_at[-1] + 2.0 * g2 * self.dbeta)
        dg_at.append(dg_at[-1] + (sigma - g2))
        self.dg_nodes = tuple(dg_at)

    # -- piecewise evaluation -------------------------------------------------

    def _pieces(self, x):
        """Wrapped coordinate, winding number, and per-piece masks."""
        x = np.asarray(x, dtype=float)
        wind = np.floor(x)
        xw = x - wind
        n = self.x_nodes
        masks = [
            xw < n[1],
            (xw >= n[1]) & (xw < n[2]),
            (xw >= n[2]) & (xw < n[3]),
            (xw >= n[3]) & (xw < n[4]),
            xw >= n[4],
        ]
        return xw, wind, masks

    @_scalar_ok
    def g(self, x):
        """Equilibrium angle map; g(0) = 0, g(x+1) = g(x) + 2 pi."""
        xw, wind, masks = self._pieces(x)
        out = np.empty_like(xw)
        n, gn = self.x_nodes, self.g_nodes
        v, vmax, a, b = self.v_now, self.v_max, self.alpha, self.beta
        g1, g2, sig = self.gamma1, self.gamma2, self.sigma
        m = masks[0]
        out[m] = v * xw[m]
        m = masks[1]
        s = (xw[m] - sig) / g1
        out[m] = gn[1] + g1 * (b * (s + 1.0) + a * h_poly_int(s))
        m = masks[2]
        out[m] = gn[2] + vmax * (xw[m] - n[2])
        m = masks[3]
        s = (xw[m] - (1.0 - sig)) / g2
        out[m] = gn[3] + g2 * (b * (s + 1.0) - a * h_poly_int(s))
        m = masks[4]
        out[m] = gn[4] + v * (xw[m] - n[4])
        return out + TWO_PI * wind

    @_scalar_ok
    def g_d1(self, x):
        """dg/dx; equals v(theta) * T at theta = g(x)."""
        xw, _, masks = self._pieces(x)
        out = np.empty_like(xw)
        v, vmax, a, b = self.v_now, self.v_max, self.alpha, self.beta
        out[masks[0]] = v
        s = (xw[masks[1]] - self.sigma) / self.gamma1
        out[masks[1]] = b + a * h_poly(s)
        out[masks[2]] = vmax
        s = (xw[masks[3]] - (1.0 - self.sigma)) / self.gamma2
        out[masks[3]] = b - a * h_poly(s)
        out[masks[4]] = v
        return out

    @_scalar_ok
    def g_d2(self, x):
        xw, _, masks = self._pieces(x)
        out = np.zeros_like(xw)
        s = (xw[masks[1]] - self.sigma) / self.gamma1
        out[masks[1]] = self.alpha * h_poly_d1(s) / self.gamma1
        s = (xw[masks[3]] - (1.0 - self.sigma)) / self.gamma2
        out[masks[3]] = -self.alpha * h_poly_d1(s) / self.gamma2
        return out

    @_scalar_ok
    def g_d3(self, x):
        xw, _, masks = self._pieces(x)
        out = np.zeros_like(xw)
        s = (xw[masks[1]] - self.sigma) / self.gamma1
        out[masks[1]] = self.alpha * h_poly_d2(s) / self.gamma1**2
        s = (xw[masks[3]] - (1.0 - self.sigma)) / self.gamma2
        out[masks[3]] = -self.alpha * h_poly_d2(s) / self.gamma2**2
        return out

    # partial derivatives with respect to the instantaneous v_min (the pieces
    # are linear in v_min, so all second v-derivatives vanish identically)

    @_scalar_ok
    def g_dv(self, x):
        xw, wind, masks = self._pieces(x)
        del wind  # dg/dv is periodic: d(2 pi)/dv = 0
        out = np.empty_like(xw)
        n, dgn = self.x_nodes, self.dg_nodes
        m = masks[0]
        out[m] = xw[m]
        m = masks[1]
        s = (xw[m] - self.sigma) / self.gamma1
        out[m] = dgn[1] + self.gamma1 * (self.dbeta * (s + 1.0) + self.dalpha * h_poly_int(s))
        m = masks[2]
        out[m] = dgn[2] + self.dv_max * (xw[m] - n[2])
        m = masks[3]
        s = (xw[m] - (1.0 - self.sigma)) / self.gamma2
        out[m] = dgn[3] + self.gamma2 * (self.dbeta * (s + 1.0) - self.dalpha * h_poly_int(s))
        m = masks[4]
        out[m] = dgn[4] + (xw[m] - n[4])
        return out

    @_scalar_ok
    def g_d1_dv(self, x):
        xw, _, masks = self._pieces(x)
        out = np.empty_like(xw)
        out[masks[0]] = 1.0
        s = (xw[masks[1]] - self.sigma) / self.gamma1
        out[masks[1]] = self.dbeta + self.dalpha * h_poly(s)
        out[masks[2]] = self.dv_max
        s = (xw[masks[3]] - (1.0 - self.sigma)) / self.gamma2
        out[masks[3]] = self.dbeta - self.dalpha * h_poly(s)
        out[masks[4]] = 1.0
        return out

    @_scalar_ok
    def g_d2_dv(self, x):
        xw, _, masks = self._pieces(x)
        out = np.zeros_like(xw)
        s = (xw[masks[1]] - self.sigma) / self.gamma1
        out[masks[1]] = self.dalpha * h_poly_d1(s) / self.gamma1
        s = (xw[masks[3]] - (1.0 - self.sigma)) / self.gamma2
        out[masks[3]] = -self.dalpha * h_poly_d1(s) / self.gamma2
        return out

    @_scalar_ok
    def g_inv(self, theta):
        """Inverse map: x with g(x) = theta (vectorized, Newton + bisection)."""
        theta = np.asarray(theta, dtype=float)
        wind = np.floor(theta / TWO_PI)
        tw = theta - TWO_PI * wind
        # initial bracket from the piecewise nodes
        gn = np.asarray(self.g_nodes)
        xn = np.asarray(self.x_nodes)
        idx = np.clip(np.searchsorted(gn, tw, side="right") - 1, 0, 4)
        lo = xn[idx]
        hi = xn[idx + 1]
        x = lo + (tw - gn[idx]) / np.maximum(self.g_d1(lo), 1e-300)
        x = np.clip(x, lo, hi)
        for _ in range(60):
            f = self.g(x) - tw
            lo = np.where(f <= 0.0, x, lo)
            hi = np.where(f > 0.0, x, hi)
            step = f / self.g_d1(x)
            if np.max(np.abs(step)) < 1e-15:
                break
            x_new = x - step
            bad = (x_new < lo) | (x_new > hi)
            x = np.where(bad, 0.5 * (lo + hi), x_new)
        return x + wind

    def velocity(self, theta):
        """Stationary angular velocity profile v(theta) = g'(g^-1(theta))/T."""
        return self.g_d1(self.g_inv(theta))

    def horizon_angles(self):
        """Nominal black-hole and white-hole horizon angles."""
        return self.g(np.asarray([self.sigma, 1.0 - self.sigma]))


def build_profile(config: RingConfig, v_min_now=None) -> GProfile:
    """Construct the position map for the given instantaneous v_min.

    With v_min_now omitted the final (fully formed) profile is returned.
    """
    v = config.v_min if v_min_now is None else float(v_min_now)
    return GProfile(config, v)


def equilibrium_positions(profile: GProfile, t, wrap=False):
    """Equilibrium angles theta_i(t) = g(i/N + t/T) for all ions.

    Unwrapped by default (monotone in i); `wrap` reduces mod 2 pi.
    """
    n = profile.config.n_ions
    x = np.arange(n) / n + t
    theta = profile.g(x)
    if wrap:
        theta = np.mod(theta, TWO_PI)
    return theta


def profile_at(config: RingConfig, t, ramped=True):
    """Profile governing the dynamics at time t of a formation run."""
    if not ramped:
        return build_profile(config)
    return build_profile(config, ramp_v_min(config, float(t)))
