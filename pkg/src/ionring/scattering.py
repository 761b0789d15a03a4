"""Backward-in-time pulse scattering off the horizon and the thermality test.

The experiment: place a single-branch (negative comoving frequency) phonon
pulse in the flat subsonic window at t = 0, integrate the first-moment
equations backwards, and spectrally decompose the early-time field.  Mode
conversion at the horizon populates a positive-frequency partner whose
Klein-Gordon norm, compared against the Bose-weighted late-time norm, tests
the thermal hypothesis.

Spectral analysis lives on the window's orthogonal DFT grid: the flat region
holds N_w of the ring's N' = N (2 pi/T)/v renormalized ion slots, so window
mode nu maps to the physical wavenumber index n = nu N'/N_w (k = 2 pi n/L).
Norm sign convention: positive comoving frequency carries positive
Klein-Gordon norm, N^+-_nu = +-2 omega_nu |dtheta^+-_nu|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import TWO_PI, RingConfig
from .dispersion import mode_frequencies, hawking_temperature_lda
from .dynamics import RingDynamics
from .profile import build_profile


# -- flat-window machinery -----------------------------------------------------

@dataclass
class FlatWindow:
    """The contiguous flat subsonic stretch of the ring at t = 0."""

    config: RingConfig
    indices: np.ndarray        # ion indices, ordered along the ring (may wrap)
    n_prime: int               # renormalized ion count of the subsonic density
    taper_frac: float = 0.05

    @property
    def size(self):
        return self.indices.size

    def taper(self):
        """Raised-cosine edge taper over taper_frac of the window length."""
        n = self.size
        w = np.ones(n)
        edge = max(2, int(round(self.taper_frac * n)))
        ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(edge) / edge))
        w[:edge] = ramp
        w[-edge:] = ramp[::-1]
        return w

    def mode_numbers(self):
        """Physical wavenumber indices n for the window DFT bins (signed)."""
        n_w = self.size
        nu = np.fft.fftfreq(n_w, d=1.0 / n_w)  # 0, 1, ..., -1
        return nu * self.n_prime / n_w

    def local_coupling(self):
        cfg = self.config
        return cfg.coupling * self.n_prime / cfg.n_ions

    def omega(self):
        """Comoving dispersion at the window bins (local chain)."""
        return mode_frequencies(self.n_prime, self.local_coupling(),
                                self.config.interaction, np.abs(self.mode_numbers()))

    def group_velocity(self):
        """Comoving group velocity d omega/d n at the bins (even in n)."""
        n_abs = np.abs(self.mode_numbers())
        dn = 0.5
        wp = mode_frequencies(self.n_prime, self.local_coupling(),
                              self.config.interaction, n_abs + dn)
        wm = mode_frequencies(self.n_prime, self.local_coupling(),
                              self.config.interaction, np.abs(n_abs - dn))
        return (wp - wm) / (2.0 * dn)


def flat_window(config: RingConfig, margin_frac=0.01, taper_frac=0.05) -> FlatWindow:
    """Ions in the flat subsonic region at t = 0 (wrapping through x = 0)."""
    profile = build_profile(config)
    sigma, g1, g2 = profile.sigma, config.gamma1, config.gamma2
    lo = 1.0 - sigma + g2 + margin_frac
    hi = 1.0 + sigma - g1 - margin_frac
    n = config.n_ions
    x = np.arange(n) / n
    offset = int(math.ceil(lo * n))
    idx = []
    for j in range(offset, offset + n):
        if lo <= j / n <= hi:
            idx.append(j % n)
    n_prime = int(round(TWO_PI * config.n_ions / config.v_min))
    return FlatWindow(config, np.asarray(idx, dtype=int), n_prime, taper_frac)


@dataclass
class PulseSpectrum:
    """Windowed spectral content of a first-moment field."""

    window: FlatWindow
    mode_numbers: np.ndarray   # physical n per bin (signed)
    omega: np.ndarray          # comoving frequencies, >= 0
    amp: np.ndarray            # dtheta_nu (complex)
    amp_dot: np.ndarray        # d/dt dtheta_nu (complex)
    time: float = 0.0

    def split_pm(self):
        """Positive/negative comoving-frequency parts (sum reconstructs)."""
        w = self.omega.copy()
        w[w == 0.0] = np.inf  # zero mode excluded from the split
        plus = 0.5 * (self.amp + 1j * self.amp_dot / w)
        minus = 0.5 * (self.amp - 1j * self.amp_dot / w)
        return plus, minus

    def kg_norms(self):
        """Per-bin Klein-Gordon norms (N^+ >= 0, N^- <= 0)."""
        plus, minus = self.split_pm()
        n_plus = 2.0 * self.omega * np.abs(plus) ** 2
        n_minus = -2.0 * self.omega * np.abs(minus) ** 2
        return n_plus, n_minus

    def lab_frequency(self, branch):
        """omega_lab = n v +- omega for the given comoving branch (+1/-1)."""
        v = self.window.config.v_min
        return self.mode_numbers * v + branch * self.omega

    def reconstruct(self):
        """Inverse transform back to the (tapered) window samples."""
        n_w = self.window.size
        field = np.fft.ifft(self.amp) * n_w
        field_dot = np.fft.ifft(self.amp_dot) * n_w
        return field, field_dot


def analyze_window(window: FlatWindow, dtheta, dtheta_dot, time=0.0, tapered=True) -> PulseSpectrum:
    """Project window samples of (dtheta, dtheta_dot) onto the DFT bins."""
    data = np.asarray(dtheta)[window.indices]
    data_dot = np.asarray(dtheta_dot)[window.indices]
    if tapered:
        w = window.taper()
        data = data * w
        data_dot = data_dot * w
    n_w = window.size
    amp = np.fft.fft(data) / n_w
    amp_dot = np.fft.fft(data_dot) / n_w
    return PulseSpectrum(window, window.mode_numbers(), window.omega(),
                         amp, amp_dot, time)


# -- pulse construction ----------------------------------------------------------

def make_final_pulse(config: RingConfig, s, window: FlatWindow | None = None,
                     center_mode=None, width_modes=20.0, real_field=False,
                     amplitude=1.0, center_x=None):
    """Single-branch late-time pulse on the upstream negative-frequency branch.

    Spectrum dtheta_n ~ n exp(-((n - n_s)/w)^2) at positive wavenumbers with
    n_s = round(2 pi s) by default, and the branch condition
    d/dt dtheta_n = +i omega_n dtheta_n.  The envelope is centered mid-window
    unless `center_x` places it at a specific index coordinate (useful to
    control when the backward evolution meets the horizon).  Returns
    (dtheta, dtheta_dot) over all ions (complex unless real_field).
    """
    if window is None:
        window = flat_window(config)
    n_s = float(round(TWO_PI * s)) if center_mode is None else float(center_mode)
    modes = window.mode_numbers()
    omega = window.omega()
    zone = window.n_prime / 2.0
    if n_s + 2.5 * width_modes > zone:
        raise ValueError("pulse support exceeds the Brillouin zone")
    spec = np.where(
        modes > 0.0,
        modes * np.exp(-(((modes - n_s) / width_modes) ** 2)),
        0.0,
    )
    if real_field:
        neg = np.where(
            modes < 0.0,
            (-modes) * np.exp(-(((-modes - n_s) / width_modes) ** 2)),
            0.0,
        )
        spec = spec + neg  # conjugate-symmetric (real spectrum)
    amp = amplitude * spec.astype(complex)
    amp_dot = 1j * omega * amp
    if real_field:
        # negative-n part must conjugate: dtheta_-n = conj(dtheta_n)
        amp_dot = np.where(modes < 0.0, -1j * omega * amp, amp_dot)
    n_w = window.size
    field = np.fft.ifft(amp) * n_w
    field_dot = np.fft.ifft(amp_dot) * n_w
    # recenter the pulse mid-window and confine with the taper
    shift = np.argmax(np.abs(field))
    target = n_w // 2
    if center_x is not None:
        pos = np.mod(window.indices / config.n_ions - center_x, 1.0)
        pos = np.minimum(pos, 1.0 - pos)
        target = int(np.argmin(pos))
    roll = target - int(shift)
    field = np.roll(field, roll)
    field_dot = np.roll(field_dot, roll)
    edge_zone = max(2, int(round(window.taper_frac * n_w)))
    edge = np.max(np.abs(np.concatenate([field[:edge_zone], field[-edge_zone:]])))
    if edge > 1e-3 * np.max(np.abs(field)):
        raise ValueError("pulse support exceeds the flat window")
    taper = window.taper()
    field *= taper
    field_dot *= taper
    dtype = float if real_field else complex
    dtheta = np.zeros(config.n_ions, dtype=dtype)
    dtheta_dot = np.zeros(config.n_ions, dtype=dtype)
    dtheta[window.indices] = field.real if real_field else field
    dtheta_dot[window.indices] = field_dot.real if real_field else field_dot
    return dtheta, dtheta_dot


# -- frequency-conservation oracle ----------------------------------------------

@dataclass
class BranchSolution:
    mode_number: float
    comoving_sign: int          # +1 / -1 comoving frequency
    lab_frequency: float        # after folding back into the zone
    fold: int                   # multiples of 2 pi N/T removed
    group_velocity_lab: float
    direction: str              # "upstream" or "downstream"


def frequency_intersections(config: RingConfig, omega0, v=None, n_prime=None,
                            max_fold=2, resolution=2001):
    """All discrete-zone solutions of n v +- omega(n) = omega0 (mod 2 pi N/T).

    Scans both comoving branches over the Brillouin zone for the folded
    frequencies omega0 + j 2 pi N/T, j in [-max_fold, max_fold]; labels each
    root upstream/downstream by the sign of its comoving group velocity.
    """
    if v is None:
        v = config.v_min
    if n_prime is None:
        n_prime = int(round(TWO_PI * config.n_ions / v))
    coupling = config.coupling * n_prime / config.n_ions
    grid = np.linspace(-n_prime / 2.0, n_prime / 2.0, resolution)
    omega = mode_frequencies(n_prime, coupling, config.interaction, np.abs(grid))
    fold_unit = TWO_PI * config.n_ions
    sols = []
    for j in range(-max_fold, max_fold + 1):
        target = omega0 + j * fold_unit
        for sign in (+1, -1):
            lab = grid * v + sign * omega
            resid = lab - target
            cross = np.where(np.diff(np.sign(resid)) != 0)[0]
            for c in cross:
                # linear root refinement
                r0, r1 = resid[c], resid[c + 1]
                frac = r0 / (r0 - r1)
                n_root = grid[c] + frac * (grid[c + 1] - grid[c])
                dn = 0.25
                wp = mode_frequencies(n_prime, coupling, config.interaction, abs(n_root) + dn)
                wm = mode_frequencies(n_prime, coupling, config.interaction, abs(abs(n_root) - dn))
                dwdn = (wp - wm) / (2 * dn) * np.sign(n_root)
                cg_com = sign * dwdn
                sols.append(
                    BranchSolution(
                        mode_number=float(n_root),
                        comoving_sign=sign,
                        lab_frequency=float(target - j * fold_unit),
                        fold=j,
                        group_velocity_lab=float(v + cg_com),
                        direction="upstream" if cg_com < 0 else "downstream",
                    )
                )
    # deduplicate near-identical roots from adjacent folds
    out = []
    for s in sols:
        if not any(abs(s.mode_number - o.mode_number) < 0.25 and s.comoving_sign == o.comoving_sign
                   for o in out):
            out.append(s)
    return out


# -- pulse identification ---------------------------------------------------------

@dataclass
class PulseBand:
    """One contiguous spectral band of a windowed field."""

    centroid_mode: float
    comoving_sign: int
    total_norm: float            # signed KG norm of the band
    lab_frequency: float         # norm-weighted, same branch
    group_velocity_lab: float
    direction: str
    bins: np.ndarray


def identify_pulses(spectrum: PulseSpectrum, trough=1e-4, min_norm_frac=1e-6):
    """Cluster |N_nu| into bands separated by troughs below trough * peak."""
    n_plus, n_minus = spectrum.kg_norms()
    v = spectrum.window.config.v_min
    bands = []
    for sign, norms in ((+1, n_plus), (-1, -n_minus)):
        peak = float(np.max(norms)) if norms.size else 0.0
        if peak <= 0.0:
            continue
        order = np.argsort(spectrum.mode_numbers)
        modes_sorted = spectrum.mode_numbers[order]
        vals = norms[order]
        mask = vals > trough * peak
        # split into contiguous runs
        runs = []
        start = None
        for i, m in enumerate(mask):
            if m and start is None:
                start = i
            elif not m and start is not None:
                runs.append((start, i))
                start = None
        if start is not None:
            runs.append((start, mask.size))
        total_all = float(np.sum(vals))
        for a, b in runs:
            w = vals[a:b]
            tot = float(np.sum(w))
            if tot < min_norm_frac * total_all:
                continue
            centroid = float(np.sum(w * modes_sorted[a:b]) / tot)
            omega_band = spectrum.omega[order][a:b]
            lab = modes_sorted[a:b] * v + sign * omega_band
            lab_c = float(np.sum(w * lab) / tot)
            dn = 0.5
            win = spectrum.window
            wp = mode_frequencies(win.n_prime, win.local_coupling(),
                                  win.config.interaction, abs(centroid) + dn)
            wm = mode_frequencies(win.n_prime, win.local_coupling(),
                                  win.config.interaction, abs(abs(centroid) - dn))
            cg_com = sign * (wp - wm) / (2 * dn) * np.sign(centroid)
            bands.append(
                PulseBand(
                    centroid_mode=centroid,
                    comoving_sign=sign,
                    total_norm=sign * tot,
                    lab_frequency=lab_c,
                    group_velocity_lab=float(v + cg_com),
                    direction="upstream" if cg_com < 0 else "downstream",
                    bins=order[a:b],
                )
            )
    bands.sort(key=lambda b: -abs(b.total_norm))
    return bands


# -- the scattering run -------------------------------------------------------------

@dataclass
class ScatterResult:
    config: RingConfig
    window: FlatWindow
    late: PulseSpectrum
    early: PulseSpectrum          # analysis snapshot (see analysis_time)
    t_back: float
    analysis_time: float = 0.0
    early_final: PulseSpectrum | None = None   # spectrum exactly at -t_back
    snapshots: list = field(default_factory=list)   # (t, dtheta, dtheta_dot)
    warnings: list = field(default_factory=list)


def backward_scatter(config: RingConfig, pulse=None, t_back=2.0, rtol=1e-10,
                     s=5, n_snapshots=0, window: FlatWindow | None = None,
                     fixed_step=None, dynamics: RingDynamics | None = None,
                     pulse_kwargs=None, approach_frac=0.45) -> ScatterResult:
    """Integrate a late-time pulse backwards in time through the horizon.

    The static black-hole profile is assumed (no formation ramp); snapshots
    record (t, dtheta, dtheta_dot) along the way and the early-time field is
    spectrally analyzed in the same flat window.

    When the pulse is built here, its envelope is placed so the backward
    evolution reaches the horizon after about approach_frac * t_back (the
    converted high-wavenumber pulses linger near the horizon for roughly one
    period before drifting back into the flat window, so the budget matters).
    """
    if window is None:
        window = flat_window(config)
    if pulse is None:
        kwargs = dict(pulse_kwargs or {})
        if "center_x" not in kwargs:
            n_s = kwargs.get("center_mode")
            if n_s is None:
                n_s = float(round(TWO_PI * s))
            c_g = mode_frequencies(
                window.n_prime, window.local_coupling(), config.interaction,
                np.asarray([n_s + 0.5, n_s - 0.5]))
            v_lab = abs(config.v_min - float(c_g[0] - c_g[1]))
            profile = build_profile(config)
            horizon_x = profile.sigma
            travel = min(approach_frac * abs(t_back) * v_lab / TWO_PI, 0.45)
            kwargs["center_x"] = np.mod(horizon_x - travel, 1.0)
        pulse = make_final_pulse(config, s, window, **kwargs)
    dtheta, dtheta_dot = pulse
    if dynamics is None:
        dynamics = RingDynamics(config, ramped=False)
    n = config.n_ions
    y0 = np.concatenate([dtheta, dtheta_dot])
    t_eval = list(np.linspace(0.0, -abs(t_back), max(n_snapshots, 16) + 1)[1:])
    y1, snaps = dynamics.propagate_moments(y0, 0.0, -abs(t_back), rtol=rtol,
                                           t_eval=t_eval, fixed_step=fixed_step)
    late = analyze_window(window, dtheta, dtheta_dot, 0.0)
    early_final = analyze_window(window, y1[:n], y1[n:], -abs(t_back))
    result = ScatterResult(config, window, late, early_final, abs(t_back),
                           analysis_time=-abs(t_back), early_final=early_final,
                           snapshots=[(t, y[:n].copy(), y[n:].copy()) for t, y in snaps])
    _select_analysis_snapshot(result)
    return result


def _out_fraction(window: FlatWindow, dtheta):
    outside = np.ones(window.config.n_ions, dtype=bool)
    outside[window.indices] = False
    return float(np.max(np.abs(np.asarray(dtheta)[outside]))
                 / max(np.max(np.abs(dtheta)), 1e-300))


def _select_analysis_snapshot(result: ScatterResult, out_tol=(0.05, 0.2), min_elapsed=0.33):
    """Pick the early-time snapshot used for pulse identification.

    The converted high-wavenumber pulses drift through the flat window and
    eventually reach the white-hole horizon, so the field at exactly -t_back
    may be partly unresolved.  Among snapshots that are (a) past
    min_elapsed * t_back and (b) well contained in the window, the most
    backward one is used, preferring snapshots where the surviving negative
    norm sits at high wavenumbers (conversion completed).  Falls back to
    -t_back with a warning when nothing qualifies.
    """
    window = result.window
    n0 = abs(float(np.sum(result.late.kg_norms()[1])))
    n_split = window.n_prime / 8.0
    scored = []
    for t, dth, dthd in result.snapshots:
        if t > -min_elapsed * result.t_back:
            continue
        of = _out_fraction(window, dth)
        spec = analyze_window(window, dth, dthd, t)
        n_plus, n_minus = spec.kg_norms()
        contained = abs(float(np.sum(n_minus)))
        if contained < 0.5 * n0:
            continue
        high = np.abs(spec.mode_numbers) > n_split
        high_frac = float(np.sum(np.abs(n_minus[high])) / max(contained, 1e-300))
        scored.append((t, spec, of, high_frac))
    candidates = []
    for tol in np.atleast_1d(out_tol):
        candidates = [c for c in scored if c[2] <= tol]
        if candidates:
            break
    if not candidates:
        result.warnings.append(
            "no well-contained early-time snapshot; analyzing the field at -t_back "
            f"(out-of-window fraction {_out_fraction(window, result.snapshots[-1][1]):.3f})"
        )
        return
    converted = [c for c in candidates if c[3] > 0.5]
    pool = converted if converted else candidates
    t, spec, of, _ = min(pool, key=lambda c: c[0])
    result.early = spec
    result.analysis_time = t
    if abs(t - (-result.t_back)) > 1e-9:
        result.warnings.append(
            f"field at -t_back not fully contained in the window; "
            f"early-time pulses identified at t = {t:+.3f} T"
        )


# -- thermality ----------------------------------------------------------------------

@dataclass
class ThermalityReport:
    temperature: float           # k_B T_H/hbar used in the Bose weights
    temperature_source: str
    n_late: float                # integrated late-time negative norm (N^0)
    n_plus_early: float          # integrated early positive norm
    n_minus_early: float         # integrated early negative norm
    n_plus_predicted: float      # Bose-weighted prediction from the late pulse
    epsilon: float               # |measured - predicted| / predicted
    spectral: dict               # curves for the modewise comparison
    warnings: list


def thermality_test(result: ScatterResult, temperature=None, mode_number=None) -> ThermalityReport:
    """Integrated and spectral comparison of the early positive-norm pulse
    against the thermal (Bose-weighted) prediction from the late pulse.
    """
    cfg = result.config
    source = "explicit"
    if temperature is None:
        est = hawking_temperature_lda(cfg, mode_number=mode_number)
        temperature = est.temperature
        source = f"lda(mode {est.mode_number})"
    theta_h = float(temperature)

    np_late, nm_late = result.late.kg_norms()
    np_early, nm_early = result.early.kg_norms()
    n0 = float(np.sum(nm_late))
    n_plus = float(np.sum(np_early))
    n_minus = float(np.sum(nm_early))

    # prediction: each late-time mode contributes |N^0_nu| * n_B(|omega_lab|)
    lab = result.late.lab_frequency(-1)
    x = np.abs(lab) / theta_h
    with np.errstate(over="ignore"):
        bose = np.where(x > 1e-12, 1.0 / np.expm1(np.clip(x, 1e-12, 500.0)), 0.0)
    n_plus_pred = float(np.sum(np.abs(nm_late) * bose))
    eps = abs(n_plus - n_plus_pred) / n_plus_pred if n_plus_pred > 0 else math.inf

    # spectral curves (density per unit lab frequency, Unruh-style)
    v = cfg.v_min
    cg = result.late.window.group_velocity()
    denom = v - cg
    safe = np.where(np.abs(denom) > 1e-12, denom, np.inf)
    spectral = {
        "late_mode_numbers": result.late.mode_numbers,
        "lab_frequency": lab,
        "n_tilde_0": np.abs(nm_late) / safe * bose,
        "early_mode_numbers": result.early.mode_numbers,
        "early_lab_plus": result.early.lab_frequency(+1),
        "n_tilde_plus": np_early / safe,
        "n_tilde_minus": np.abs(nm_early) / safe * np.exp(-np.minimum(
            np.abs(result.early.lab_frequency(-1)) / theta_h, 500.0)),
    }
    return ThermalityReport(theta_h, source, n0, n_plus, n_minus, n_plus_pred,
                            float(eps), spectral, list(result.warnings))
