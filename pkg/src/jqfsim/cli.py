"""Command-line entry point: ``jqfsim <subcommand> --config FILE``."""
from __future__ import annotations

import argparse
import csv
import logging
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, analytic, experiments
from .config import ConfigError, RunConfig, parse_config
from .drives import GaussianRamp, Step, matching_step_onset
from .integrator import SimConfig, configure_model, evolve, max_p1
from .model import build_model
from .search import BoundaryError
from .units import ghz, mhz, to_ghz, to_mhz

log = logging.getLogger("jqfsim")

SUBCOMMANDS = ("simulate", "resonance", "scan-alpha", "optimize-pulse", "sweep-sigma",
               "compare", "njqf", "analytic")


def setup_logging():
    level = os.environ.get("JQF_SIM_LOG", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


class RowWriter:
    """Scan CSV that is flushed row by row, so aborted sweeps keep their rows."""

    def __init__(self, path):
        self.fh = open(path, "w", newline="")
        self.w = csv.writer(self.fh)
        self.w.writerow(experiments.SCAN_HEADER)
        self.fh.flush()

    def __call__(self, row):
        self.w.writerow(row.csv_fields())
        self.fh.flush()

    def close(self):
        self.fh.close()


def write_manifest(out: Path, command: str, cfg: RunConfig | None, started: float, extra=None):
    lines = [
        f"tool: jqfsim {__version__}",
        f"command: {command}",
        f"python: {platform.python_version()}",
        f"numpy: {np.__version__}",
        f"platform: {platform.platform()}",
        f"wall_time_s: {time.time() - started:.3f}",
    ]
    for k, v in (extra or {}).items():
        lines.append(f"{k}: {v}")
    if cfg is not None:
        lines += [f"config_path: {cfg.path}", "config:", "-----", cfg.source.rstrip(), "-----"]
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


def _model(cfg: RunConfig):
    return configure_model(build_model(cfg.specs), cfg.sim)


def _rabi(cfg: RunConfig, model):
    rabi = cfg.experiment.get("rabi")
    if rabi is None:
        rabi = experiments.rabi_of(model, getattr(cfg.drive, "e_amp", 0.0))
    if rabi <= 0:
        raise ConfigError("experiment needs a positive Rabi rate (drive.rabi_mhz)")
    return rabi


def _alphas(cfg):
    alphas = cfg.experiment.get("alphas")
    if not alphas:
        raise ConfigError("experiment.alphas_mhz is required for scan-alpha")
    return alphas


def _sigma(cfg, default=10.0):
    return cfg.experiment.get("sigma_ns", getattr(cfg.drive, "sigma", None) or default)


def _dt(cfg):
    return cfg.sim.dt


def cmd_simulate(cfg, out, args):
    model = _model(cfg)
    traj = evolve(model, cfg.drive, cfg.omega_d, cfg.sim)
    traj.to_csv(out / "trajectory.csv")
    pk = max_p1(traj)
    print(f"p1_max={pk.p1:.6f} t_at_max_ns={pk.t:.4f} p1_final={traj.p1[-1]:.6f} "
          f"trace_err_max={traj.trace_error.max():.3g}")
    return {"dt_ns": traj.metadata["dt"]}


def cmd_resonance(cfg, out, args):
    model = _model(cfg)
    rabi = _rabi(cfg, model)
    envelope = cfg.drive if isinstance(cfg.drive, (GaussianRamp, Step)) else None
    res = experiments.find_resonance_cw(
        model, rabi, bracket=cfg.experiment.get("bracket_ghz"), envelope=envelope,
        horizon=cfg.experiment.get("horizon_ns"), dt=_dt(cfg), jobs=args.jobs)
    row = experiments.ScanRow(to_mhz(model.dq.alpha), res.omega_d,
                              rabi / np.sqrt(2 * model.dq.gamma), res.p1_max, False, to_mhz(rabi))
    result = experiments.ScanResult([row])
    result.to_csv(out / "resonance.csv")
    with open(out / "prescan.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega_d_GHz", "p1_max"])
        for p in res.scan:
            w.writerow([f"{p.x:.12g}", f"{p.y:.12g}"])
    print(f"omega_d_res_GHz={res.omega_d:.4f} p1_max={res.p1_max:.6f} "
          f"shift_MHz={(res.omega_d - to_ghz(model.omega_q)) * 1e3:.4f}")


def cmd_scan_alpha(cfg, out, args):
    model = _model(cfg)
    variant = cfg.experiment.get("variant", "cw")
    sink = RowWriter(out / f"scan_alpha_{variant}.csv")
    try:
        if variant == "cw":
            res = experiments.scan_alpha_cw(model, _alphas(cfg), _rabi(cfg, model), dt=_dt(cfg),
                                            jobs=args.jobs, sink=sink)
        else:
            res = experiments.scan_alpha_pulse(model, _alphas(cfg), _sigma(cfg), dt=_dt(cfg),
                                               jobs=args.jobs, sink=sink)
    finally:
        sink.close()
    for r in res.rows:
        print(f"alpha_MHz={r.param:g} omega_d_opt_GHz={r.omega_d_opt:.6f} p1_opt={r.p1_opt:.6f}"
              f"{' boundary' if r.boundary_flag else ''}")
    return res.provenance


def cmd_optimize_pulse(cfg, out, args):
    model = _model(cfg)
    sigma = _sigma(cfg)
    brackets = None
    fb, ab = cfg.experiment.get("freq_bracket_ghz"), cfg.experiment.get("amp_bracket_mhz")
    if fb or ab:
        dfb, dab = experiments.default_pulse_brackets(model, sigma)
        scale = 1 / np.sqrt(2 * model.dq.gamma)
        brackets = (fb or dfb, tuple(mhz(a) * scale for a in ab) if ab else dab)
    opt = experiments.optimize_pulse(model, sigma, brackets, dt=_dt(cfg))
    rabi = experiments.rabi_of(model, opt.e_amp)
    experiments.ScanResult([experiments.ScanRow(sigma, opt.omega_d, opt.e_amp, opt.p1,
                                                opt.boundary, to_mhz(rabi))]).to_csv(out / "optimum.csv")
    print(f"sigma_ns={sigma:g} omega_d_opt_GHz={opt.omega_d:.6f} rabi_MHz={to_mhz(rabi):.4f} "
          f"p1_opt={opt.p1:.6f} rounds={opt.rounds} converged={opt.converged} "
          f"post_pulse_slope_per_ns={opt.stationary_slope:.3g}")
    return {"rounds": opt.rounds, "converged": opt.converged}


def cmd_sweep_sigma(cfg, out, args):
    model = _model(cfg)
    sigmas = cfg.experiment.get("sigmas") or [2.5, 5.0, 10.0, 15.0, 20.0]
    baseline = cfg.experiment.get("baseline", True)
    full_sink = RowWriter(out / "sweep_sigma_full.csv")
    try:
        full, _ = experiments.sweep_sigma(model, sigmas, dt=_dt(cfg), jobs=args.jobs,
                                          sink=full_sink, baseline=False)
    finally:
        full_sink.close()
    base = None
    if baseline:
        base_sink = RowWriter(out / "sweep_sigma_two_level.csv")
        try:
            base, _ = experiments.sweep_sigma(experiments.two_level_baseline(model), sigmas,
                                              dt=_dt(cfg), jobs=args.jobs, sink=base_sink,
                                              baseline=False)
        finally:
            base_sink.close()
    for r in full.rows:
        print(f"model=full sigma_ns={r.param:g} p1_opt={r.p1_opt:.6f} omega_d_opt_GHz={r.omega_d_opt:.6f}")
    for r in (base.rows if base else []):
        print(f"model=two-level sigma_ns={r.param:g} p1_opt={r.p1_opt:.6f} "
              f"omega_d_opt_GHz={r.omega_d_opt:.6f}")


def cmd_compare(cfg, out, args):
    model = _model(cfg)
    sigma = _sigma(cfg)
    rabi = cfg.experiment.get("rabi")
    e_amp = rabi / np.sqrt(2 * model.dq.gamma) if rabi else None
    cmp_ = experiments.compare_cw_pulse(
        model, sigma, e_amp, cfg.experiment.get("freq_pulse_ghz"), cfg.experiment.get("freq_cw_ghz"),
        cfg.experiment.get("horizon_ns"), dt=_dt(cfg))
    cmp_.pulse.to_csv(out / "compare_pulse.csv")
    cmp_.cw.to_csv(out / "compare_cw.csv")
    print(f"rabi_MHz={to_mhz(experiments.rabi_of(model, cmp_.e_amp)):.4f} "
          f"pulse_p1_max={cmp_.pulse_peak:.6f} pulse_omega_d_GHz={cmp_.omega_d_pulse:.6f} "
          f"cw_p1_max={cmp_.cw_peak:.6f} cw_omega_d_GHz={cmp_.omega_d_cw:.6f}")


def cmd_njqf(cfg, out, args):
    model = _model(cfg)
    sigma = _sigma(cfg)
    rabi = cfg.experiment.get("rabi")
    e_amp = rabi / np.sqrt(2 * model.dq.gamma) if rabi else None
    study = experiments.njqf_study(model, cfg.experiment.get("n_jqf") or [2, 3, 4], sigma,
                                   e_amp, cfg.experiment.get("freq_pulse_ghz"), dt=_dt(cfg))
    study.result.to_csv(out / "njqf.csv")
    for n, traj in study.trajectories.items():
        traj.to_csv(out / f"njqf_{n}_trajectory.csv")
    for r in study.result.rows:
        print(f"n_jqf={int(r.param)} p1_meas={r.p1_opt:.8f}")


def analytic_table(omega, alpha, rabi, omega_d=None):
    """Rows (name, value) of the closed-form calibration table; inputs in rad/ns."""
    shift = analytic.resonance_shift(rabi, alpha)
    wd = omega + shift if omega_d is None else omega_d
    ds = analytic.dressed_states(omega, wd, alpha, rabi)
    exact = analytic.exact_resonance(omega, alpha, rabi)
    sw_p, sw_m = analytic.sw_effective_energies(omega - wd, 2 * (omega - wd) + alpha, rabi)
    return [
        ("shift_MHz", to_mhz(shift)),
        ("omega_d_res_GHz", to_ghz(omega + shift)),
        ("omega_d_exact_GHz", to_ghz(exact)),
        ("p1_max", analytic.p1_max_approx(rabi, alpha)),
        ("p1_max_exact", analytic.p1_max_exact(rabi, alpha, omega, wd)),
        ("sw_deficit", analytic.sw_population_deficit(0.0, alpha, rabi)),
        ("E_plus_MHz", to_mhz(ds.e_plus)),
        ("E_minus_MHz", to_mhz(ds.e_minus)),
        ("sw_E_plus_MHz", to_mhz(sw_p)),
        ("sw_E_minus_MHz", to_mhz(sw_m)),
        ("theta_plus_rad", ds.theta_plus),
    ]


def _fmt(name, v):
    if name == "shift_MHz":
        return f"{v:.3f}"
    if name == "p1_max":
        return f"{v:.4f}"
    return f"{v:.8g}"


def cmd_analytic(args):
    if args.config:
        cfg = parse_config(args.config)
        omega, alpha = cfg.dq.omega, cfg.dq.alpha
        rabi = cfg.experiment.get("rabi") or np.sqrt(2 * cfg.dq.gamma) * getattr(cfg.drive, "e_amp", 0)
        omega_d = None
    else:
        if args.omega is None or args.alpha is None or args.rabi is None:
            raise ConfigError("analytic needs --config or all of --omega --alpha --rabi (GHz)")
        omega, alpha, rabi = ghz(args.omega), ghz(args.alpha), ghz(args.rabi)
        omega_d = ghz(args.omega_d) if args.omega_d is not None else None
    for name, v in analytic_table(omega, alpha, rabi, omega_d):
        print(f"{name}={_fmt(name, v)}")


HANDLERS = {
    "simulate": cmd_simulate,
    "resonance": cmd_resonance,
    "scan-alpha": cmd_scan_alpha,
    "optimize-pulse": cmd_optimize_pulse,
    "sweep-sigma": cmd_sweep_sigma,
    "compare": cmd_compare,
    "njqf": cmd_njqf,
}


def build_parser():
    p = argparse.ArgumentParser(prog="jqfsim", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, required=name != "analytic")
        sp.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
        sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="worker processes for sweeps (default: logical cores)")
        if name == "analytic":
            sp.add_argument("--omega", type=float, help="qubit frequency, GHz")
            sp.add_argument("--alpha", type=float, help="anharmonicity, GHz")
            sp.add_argument("--rabi", type=float, help="Rabi frequency, GHz")
            sp.add_argument("--omega-d", type=float, help="drive frequency, GHz")
    return p


def main(argv=None):
    setup_logging()
    args = build_parser().parse_args(argv)
    started = time.time()
    try:
        if args.command == "analytic":
            cmd_analytic(args)
            return 0
        cfg = parse_config(args.config)
        out = args.out or cfg.output_dir
        out.mkdir(parents=True, exist_ok=True)
        extra = HANDLERS[args.command](cfg, out, args) or {}
        write_manifest(out, " ".join(["jqfsim", args.command] + (argv or sys.argv[2:])), cfg,
                       started, extra)
        return 0
    except ConfigError as err:
        print(f"error kind=config message={str(err)!r}", file=sys.stderr)
        return 2
    except BoundaryError as err:
        print(f"error kind=boundary message={str(err)!r}", file=sys.stderr)
        return 3
    except Exception as err:  # noqa: BLE001 - reported as a machine-readable line
        print(f"error kind={type(err).__name__} message={str(err)!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
