"""Command-line driver: run one experiment, emit CSV + manifest (+ renders).

    ionring <subcommand> [--preset NAME | --config FILE] [--out DIR] [options]

Subcommands: profile, dispersion, scatter, correlate, entangle, stability,
plan-measurement.  Exit code 0 only if every requested artifact was written.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import TWO_PI, RingConfig, ConfigError, config_from_mapping
from .correlations import (correlation_map, difference_correlation_map,
                           entanglement_series, horizon_bands, neutralize_zero_mode,
                           peak_extract, crossover_temperature)
from .dispersion import (NoHorizonError, hawking_temperature_lda,
                         hawking_temperature_nn, homogeneous_modes, omega_max,
                         sound_velocity_nn)
from .dynamics import GaussianState, RingDynamics, thermal_state
from .forces import coulomb_force_net, external_force
from .output import (load_config_file, write_csv, write_manifest,
                     write_matrix_csv, write_pgm)
from .planner import ExperimentPlan, full_plan_report
from .presets import preset, preset_names
from .profile import build_profile, equilibrium_positions
from .scattering import backward_scatter, identify_pulses, thermality_test
from .stability import bounded_growth, monodromy, stability_scan


def _build_config(args):
    options = {}
    if args.preset:
        cfg, options = preset(args.preset)
    elif args.config:
        cfg = config_from_mapping(load_config_file(args.config))
    else:
        raise ConfigError("config", "provide --preset or --config")
    overrides = {}
    for name in ("n_ions", "coupling", "interaction", "t0_temp", "gamma1"):
        val = getattr(args, name.replace("-", "_"), None)
        if val is not None:
            overrides[name] = val
    if overrides:
        cfg = cfg.with_(**overrides)
    return cfg, options


def _finish(args, name, cfg, files, tolerances=None, extra=None):
    manifest = os.path.join(args.out, f"{name}_manifest.json")
    write_manifest(manifest, name, cfg.as_dict(), files, tolerances, extra)
    for f in files + [manifest]:
        print(f"wrote {f}")
    return 0


def cmd_profile(args):
    cfg, _ = _build_config(args)
    prof = build_profile(cfg)
    theta = equilibrium_positions(prof, 0.0)
    v = prof.g_d1(np.arange(cfg.n_ions) / cfg.n_ions)
    fe = external_force(prof, cfg, theta)
    fc = coulomb_force_net(theta, charge_sq=cfg.charge_sq,
                           nearest_neighbor=cfg.nearest_neighbor)
    path = os.path.join(args.out, "profile.csv")
    write_csv(path, ["ion", "theta0", "velocity", "external_force", "coulomb_force"],
              [np.arange(cfg.n_ions), theta, v, fe, fc])
    extra = {"v_max_frac": cfg.v_max_frac,
             "horizon_angles": list(prof.horizon_angles())}
    return _finish(args, "profile", cfg, [path], extra=extra)


def cmd_dispersion(args):
    cfg, options = _build_config(args)
    n_prime = int(round(TWO_PI * cfg.n_ions / cfg.v_min))
    files = []
    for label, interaction in (("nn", "nearest-neighbor"), ("full", "full-coulomb")):
        tab = homogeneous_modes(n_prime, cfg.coupling * n_prime / cfg.n_ions,
                                interaction, max_mode=n_prime // 2)
        path = os.path.join(args.out, f"dispersion_{label}.csv")
        write_csv(path, ["mode", "omega", "group_velocity"],
                  [tab.mode_numbers, tab.omega, tab.group_velocity])
        files.append(path)
    rows = {"mode": [], "temperature": [], "kappa": [], "theta_h": [], "interaction": []}
    for m in options.get("modes", range(1, 11)):
        try:
            est = hawking_temperature_lda(cfg, mode_number=m)
        except NoHorizonError:
            continue
        rows["mode"].append(m)
        rows["temperature"].append(est.temperature)
        rows["kappa"].append(est.surface_gravity)
        rows["theta_h"].append(est.theta_h)
        rows["interaction"].append(cfg.interaction)
    path = os.path.join(args.out, "hawking_temperature.csv")
    write_csv(path, list(rows), list(rows.values()))
    files.append(path)
    om, om_mode = omega_max(cfg)
    extra = {"omega_max": om, "omega_max_mode": om_mode}
    if cfg.nearest_neighbor:
        prof = build_profile(cfg)
        try:
            extra["kappa_closed_form"] = hawking_temperature_nn(prof, cfg).surface_gravity
        except NoHorizonError:
            extra["kappa_closed_form"] = None
    return _finish(args, "dispersion", cfg, files, extra=extra)


def cmd_scatter(args):
    cfg, options = _build_config(args)
    s = args.s if args.s is not None else options.get("s", 5)
    t_back = args.t_back if args.t_back is not None else options.get("t_back", 2.0)
    dyn = RingDynamics(cfg)
    res = backward_scatter(cfg, s=s, t_back=t_back,
                           fixed_step=dyn.suggest_fixed_step(), dynamics=dyn,
                           n_snapshots=options.get("snapshots", 16))
    files = []
    snap_path = os.path.join(args.out, "scatter_snapshots.csv")
    rows = {"time": [], "ion": [], "dtheta_re": [], "dtheta_im": [],
            "dtheta_dot_re": [], "dtheta_dot_im": []}
    for t, dth, dthd in res.snapshots:
        for i in range(cfg.n_ions):
            rows["time"].append(t)
            rows["ion"].append(i)
            rows["dtheta_re"].append(dth[i].real)
            rows["dtheta_im"].append(np.imag(dth[i]))
            rows["dtheta_dot_re"].append(dthd[i].real)
            rows["dtheta_dot_im"].append(np.imag(dthd[i]))
    write_csv(snap_path, list(rows), [np.asarray(v) for v in rows.values()])
    files.append(snap_path)
    for tag, spec in (("late", res.late), ("early", res.early)):
        n_plus, n_minus = spec.kg_norms()
        path = os.path.join(args.out, f"scatter_spectrum_{tag}.csv")
        write_csv(path, ["mode", "omega", "norm_plus", "norm_minus"],
                  [spec.mode_numbers, spec.omega, n_plus, n_minus])
        files.append(path)
    rep = thermality_test(res)
    rep_path = os.path.join(args.out, "thermality.json")
    with open(rep_path, "w") as fh:
        json.dump({
            "temperature": rep.temperature,
            "temperature_source": rep.temperature_source,
            "n_late": rep.n_late,
            "n_plus_early": rep.n_plus_early,
            "n_minus_early": rep.n_minus_early,
            "n_plus_predicted": rep.n_plus_predicted,
            "epsilon": rep.epsilon,
            "analysis_time": res.analysis_time,
            "warnings": rep.warnings,
            "pulses": [
                {"mode": b.centroid_mode, "sign": b.comoving_sign,
                 "direction": b.direction, "norm": b.total_norm,
                 "lab_frequency": b.lab_frequency,
                 "lab_velocity": b.group_velocity_lab}
                for b in identify_pulses(res.early)[:8]
            ],
        }, fh, indent=2)
    files.append(rep_path)
    spectral = rep.spectral
    spath = os.path.join(args.out, "thermality_spectral.csv")
    write_csv(spath,
              ["mode", "lab_frequency", "n_tilde_0", "n_tilde_plus", "n_tilde_minus"],
              [spectral["late_mode_numbers"], spectral["lab_frequency"],
               spectral["n_tilde_0"], spectral["n_tilde_plus"], spectral["n_tilde_minus"]])
    files.append(spath)
    return _finish(args, "scatter", cfg, files,
                   extra={"epsilon": rep.epsilon, "analysis_time": res.analysis_time})


def _formation_state(cfg, time, rtol=1e-9):
    dyn = RingDynamics(cfg, ramped=True)
    base = thermal_state(cfg)
    u, _ = dyn.propagator(0.0, time, rtol=rtol, fixed_step=dyn.suggest_fixed_step())
    state = GaussianState(u @ base.mean, u @ base.cov @ u.T, time,
                          {"t0_temp": cfg.t0_temp})
    return neutralize_zero_mode(state, dyn, u), dyn


def cmd_correlate(args):
    cfg, options = _build_config(args)
    time = args.time if args.time is not None else options.get("time", 0.5)
    if "t0_in_hawking_units" in options and cfg.t0_temp == 0.0:
        est = hawking_temperature_lda(cfg)
        cfg = cfg.with_(t0_temp=options["t0_in_hawking_units"] * est.temperature)
    state, _ = _formation_state(cfg, time)
    cmap = correlation_map(state, cfg)
    files = []
    mat_path = os.path.join(args.out, "correlations.csv")
    write_matrix_csv(mat_path, cmap.matrix, comment=f"C_ij at t={time}")
    files.append(mat_path)
    ridge = peak_extract(cmap, cfg)
    ridge_path = os.path.join(args.out, "ridge.json")
    with open(ridge_path, "w") as fh:
        json.dump({"present": ridge.present, "peak_value": ridge.peak_value,
                   "slope": ridge.slope, "predicted_slope": ridge.predicted_slope,
                   "noise_floor": ridge.noise_floor}, fh, indent=2)
    files.append(ridge_path)
    delta = options.get("delta", args.delta)
    if delta:
        dpath = os.path.join(args.out, f"difference_correlations_d{delta}.csv")
        write_matrix_csv(dpath, difference_correlation_map(state, cfg, delta))
        files.append(dpath)
    pgm = os.path.join(args.out, "correlations.pgm")
    write_pgm(pgm, cmap.matrix, symmetric=True)
    files.append(pgm)
    return _finish(args, "correlate", cfg, files,
                   extra={"time": time, "ridge_present": ridge.present})


def cmd_entangle(args):
    cfg, options = _build_config(args)
    times = options.get("times", tuple(round(0.1 * k, 3) for k in range(1, 11)))
    t0_sweep = (0.0,)
    if "t0_sweep_hawking" in options:
        est = hawking_temperature_lda(cfg)
        t0_sweep = tuple(x * est.temperature for x in options["t0_sweep_hawking"])
    series = entanglement_series(cfg, times, t0_sweep=t0_sweep)
    files = []
    cols = {"time": np.asarray(series.times)}
    if series.entropy is not None:
        cols["entropy_bits"] = series.entropy
    for t0, vals in series.negativity.items():
        cols[f"negativity_T0_{t0:.6g}"] = vals
    path = os.path.join(args.out, "entanglement.csv")
    write_csv(path, list(cols), list(cols.values()))
    files.append(path)
    extra = {"entropy_rate": series.entropy_rate,
             "rates": {f"{k:.6g}": v for k, v in series.rates.items()},
             "crossover_T0": crossover_temperature(series)}
    return _finish(args, "entangle", cfg, files, extra=extra)


def _parse_grid(spec):
    kind, lo, hi, num = spec.split(":")
    lo, hi, num = float(lo), float(hi), int(num)
    if kind == "lin":
        return np.linspace(lo, hi, num)
    if kind == "geom":
        return np.geomspace(lo, hi, num)
    raise ValueError(f"unknown grid kind {kind!r}")


def cmd_stability(args):
    cfg, options = _build_config(args)
    files = []
    if "couplings_pair" in options:
        rows = {"coupling": [], "period": [], "nu": []}
        for c in options["couplings_pair"]:
            sub = cfg.with_(coupling=float(c))
            nu, _ = bounded_growth(sub, options.get("n_periods", 10))
            for k, v in enumerate(nu, 1):
                rows["coupling"].append(c)
                rows["period"].append(k)
                rows["nu"].append(v)
        path = os.path.join(args.out, "bounded_growth.csv")
        write_csv(path, list(rows), [np.asarray(v) for v in rows.values()])
        files.append(path)
        return _finish(args, "stability", cfg, files)
    couplings = _parse_grid(options.get("couplings", "geom:0.05:3.0:21"))
    v_fracs = _parse_grid(options.get("v_min_fracs", "lin:0.55:0.999:15"))
    points = stability_scan(couplings, v_fracs, cfg)
    path = os.path.join(args.out, "stability_scan.csv")
    write_csv(path, ["coupling", "v_min_frac", "mu", "log10_mu_excess", "sonic_class"],
              [np.asarray([p.coupling for p in points]),
               np.asarray([p.v_min_frac for p in points]),
               np.asarray([p.mu for p in points]),
               np.asarray([p.log_mu_excess for p in points]),
               np.asarray([p.sonic_class for p in points])])
    files.append(path)
    grid = np.asarray([p.log_mu_excess for p in points]).reshape(len(couplings), len(v_fracs))
    pgm = os.path.join(args.out, "stability_scan.pgm")
    write_pgm(pgm, grid, symmetric=False)
    files.append(pgm)
    return _finish(args, "stability", cfg, files)


def cmd_plan(args):
    cfg, options = _build_config(args)
    plan_kwargs = {}
    for key in ("species", "ion_spacing", "laser_wavelength", "delta_index",
                "n_illuminated", "t_measure_frac", "rotation_period"):
        if key in options:
            plan_kwargs[key] = options[key]
    if "pinned_hawking" in options:
        plan_kwargs["hawking_temperature"] = options["pinned_hawking"]
    if args.plan_json:
        with open(args.plan_json) as fh:
            plan_kwargs.update(json.load(fh))
    plan = ExperimentPlan(config=cfg, **plan_kwargs)
    report = full_plan_report(plan)
    path = os.path.join(args.out, "plan.json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=_np_default)
        fh.write("\n")
    return _finish(args, "plan-measurement", cfg, [path])


def _np_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(str(type(obj)))


def main(argv=None):
    parser = argparse.ArgumentParser(prog="ionring",
                                     description="acoustic-horizon phonon simulator on rotating ion rings")
    parser.add_argument("--list-presets", action="store_true")
    sub = parser.add_subparsers(dest="subcommand")
    commands = {
        "profile": cmd_profile,
        "dispersion": cmd_dispersion,
        "scatter": cmd_scatter,
        "correlate": cmd_correlate,
        "entangle": cmd_entangle,
        "stability": cmd_stability,
        "plan-measurement": cmd_plan,
    }
    for name in commands:
        p = sub.add_parser(name)
        p.add_argument("--preset", choices=preset_names())
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--n-ions", type=int, dest="n_ions")
        p.add_argument("--coupling", type=float)
        p.add_argument("--interaction")
        p.add_argument("--t0-temp", type=float, dest="t0_temp")
        p.add_argument("--gamma1", type=float)
        if name == "scatter":
            p.add_argument("--s", type=int)
            p.add_argument("--t-back", type=float, dest="t_back")
        if name == "correlate":
            p.add_argument("--time", type=float)
            p.add_argument("--delta", type=int, default=0)
        if name == "plan-measurement":
            p.add_argument("--plan-json", dest="plan_json",
                           help="JSON file with ExperimentPlan overrides")
    args = parser.parse_args(argv)
    if args.list_presets:
        for n in preset_names():
            print(n)
        return 0
    if not args.subcommand:
        parser.print_help()
        return 2
    os.makedirs(args.out, exist_ok=True)
    try:
        return commands[args.subcommand](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
