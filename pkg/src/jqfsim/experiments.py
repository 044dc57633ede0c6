"""Reproduction harness: resonance searches, pulse optimisation and sweeps.

Drive frequencies cross this layer in GHz (brackets in, optima out) because
they are what the scans report; Rabi rates and amplitudes stay internal
(rad/ns and sqrt(rad/ns)).
"""
from __future__ import annotations

import csv
import hashlib
import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import partial
from typing import NamedTuple

import numpy as np

from . import analytic
from .drives import CW, Gaussian, GaussianRamp, amplitude_from_rabi, pi_pulse_amplitude
from .integrator import SimConfig, Trajectory, evolve, linear_slope, max_p1
from .model import SystemModel
from .search import BoundaryError, bracketed_max, golden_section_max
from .units import ghz, to_ghz, to_mhz

log = logging.getLogger(__name__)

SCAN_HEADER = ["param", "omega_d_opt_GHz", "e_amp_MHz", "p1_opt", "boundary_flag"]
FREQ_TOL_GHZ = 1e-5  # 0.01 MHz
AMP_RTOL = 1e-4
MIN_HALF_WIDTH_GHZ = 3e-4


@contextmanager
def worker_map(jobs: int = 1):
    """``map``-like callable; a process pool when jobs > 1. Output order is input order."""
    if jobs is None or jobs <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield pool.map


@dataclass
class ScanRow:
    param: float
    omega_d_opt: float  # GHz
    e_amp: float  # sqrt(rad/ns)
    p1_opt: float
    boundary_flag: bool = False
    rabi_mhz: float = float("nan")

    def __post_init__(self):
        for name in ("param", "omega_d_opt", "e_amp", "p1_opt", "rabi_mhz"):
            setattr(self, name, float(getattr(self, name)))
        self.boundary_flag = bool(self.boundary_flag)

    def csv_fields(self):
        return [f"{self.param:.12g}", f"{self.omega_d_opt:.12g}", f"{self.rabi_mhz:.12g}",
                f"{self.p1_opt:.12g}", int(self.boundary_flag)]


@dataclass
class ScanResult:
    rows: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(SCAN_HEADER)
            for row in self.rows:
                w.writerow(row.csv_fields())


def _provenance(**inputs):
    blob = repr(sorted((k, repr(v)) for k, v in inputs.items())).encode()
    return {"config_hash": hashlib.sha256(blob).hexdigest()[:16],
            "started": time.strftime("%Y-%m-%dT%H:%M:%S")}


def _finish(result: ScanResult):
    result.provenance["finished"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    return result


def rabi_of(model: SystemModel, e_amp: float) -> float:
    return math.sqrt(2 * model.dq.gamma) * e_amp


def _dq_shift(model: SystemModel, rabi: float) -> float:
    """Analytic O(Omega^2) shift, zero when the DQ has no |2>."""
    if model.dims[0] < 3 or model.dq.alpha == 0:
        return 0.0
    return analytic.resonance_shift(rabi, model.dq.alpha)


# -- cw resonance -----------------------------------------------------------

def rabi_period(rabi: float) -> float:
    """Period of p1 = sin^2(Omega t)."""
    return math.pi / rabi


def default_cw_bracket(model: SystemModel, rabi: float):
    shift = to_ghz(_dq_shift(model, rabi))
    half = max(0.6 * abs(shift), MIN_HALF_WIDTH_GHZ)
    centre = to_ghz(model.omega_q) + shift
    return centre - half, centre + half


def cw_objective(freq_ghz, model, envelope, t_end, dt=None):
    traj = evolve(model, envelope, ghz(freq_ghz), SimConfig(t_end=t_end, dt=dt))
    return max_p1(traj).p1


class Resonance(NamedTuple):
    omega_d: float  # GHz
    p1_max: float
    scan: list
    horizon: float


def find_resonance_cw(model: SystemModel, rabi: float, bracket=None, envelope=None,
                      horizon=None, tol=FREQ_TOL_GHZ, n_grid=21, dt=None, jobs=1) -> Resonance:
    """Drive frequency maximising max_t p1 under a cw (or ramped) drive.

    Objective horizon defaults to three Rabi periods after the envelope
    reaches its plateau.
    """
    e_amp = amplitude_from_rabi(rabi, model.dq.gamma)
    if envelope is None:
        envelope = CW(e_amp)
    if horizon is None:
        onset = envelope.t0 if isinstance(envelope, GaussianRamp) else 0.0
        horizon = onset + 3 * rabi_period(rabi)
    if bracket is None:
        bracket = default_cw_bracket(model, rabi)
    f = partial(cw_objective, model=model, envelope=envelope, t_end=horizon, dt=dt)
    with worker_map(jobs) as mapper:
        x, y, scan = bracketed_max(f, bracket[0], bracket[1], tol, n_grid, mapper)
    return Resonance(x, y, scan, horizon)


def _alpha_point(alpha, model, rabi, tol, dt, mode, sigma):
    m = model.with_alpha(alpha)
    try:
        if mode == "cw":
            res = find_resonance_cw(m, rabi, tol=tol, dt=dt)
            ceiling = analytic.p1_max_exact(rabi, alpha, m.dq.omega, ghz(res.omega_d))
            if res.p1_max > ceiling + 1e-3:
                log.warning("alpha/2pi=%.1f MHz: numeric p1_max %.6f exceeds b^2/s^2 = %.6f by %.2e",
                            to_mhz(alpha), res.p1_max, ceiling, res.p1_max - ceiling)
            return ScanRow(to_mhz(alpha), res.omega_d, amplitude_from_rabi(rabi, m.dq.gamma),
                           res.p1_max, False, to_mhz(rabi))
        opt = optimize_pulse(m, sigma, dt=dt)
        return ScanRow(to_mhz(alpha), opt.omega_d, opt.e_amp, opt.p1, opt.boundary,
                       to_mhz(rabi_of(m, opt.e_amp)))
    except BoundaryError as err:
        log.warning("alpha/2pi=%.1f MHz: %s", to_mhz(alpha), err)
        best = max(err.scan, key=lambda p: p.y) if err.scan else None
        e_amp = amplitude_from_rabi(rabi, m.dq.gamma) if rabi else float("nan")
        return ScanRow(to_mhz(alpha), best.x if best else float("nan"), e_amp,
                       best.y if best else float("nan"), True, to_mhz(rabi) if rabi else float("nan"))


def _scan(points, worker, jobs, sink, result):
    with worker_map(jobs) as mapper:
        for row in mapper(worker, points):
            result.rows.append(row)
            if sink is not None:
                sink(row)
    return _finish(result)


def scan_alpha_cw(model: SystemModel, alphas, rabi, tol=FREQ_TOL_GHZ, dt=None, jobs=1,
                  sink=None) -> ScanResult:
    """cw resonance and peak p1 per anharmonicity (applied to both qubits)."""
    result = ScanResult(provenance=_provenance(kind="scan_alpha_cw", alphas=list(alphas), rabi=rabi,
                                               specs=model.specs))
    worker = partial(_alpha_point, model=model, rabi=rabi, tol=tol, dt=dt, mode="cw", sigma=None)
    return _scan(list(alphas), worker, jobs, sink, result)


# -- pulses -----------------------------------------------------------------

def pulse_envelope(e_amp, sigma):
    return Gaussian(e_amp, 2 * sigma, sigma)


def measurement_time(sigma):
    return 5 * sigma  # t0 + 3 sigma


def pulse_objective(freq_ghz, e_amp, model, sigma, dt=None):
    traj = evolve(model, pulse_envelope(e_amp, sigma), ghz(freq_ghz),
                  SimConfig(t_end=measurement_time(sigma), dt=dt))
    return float(traj.p1[-1])


@dataclass
class PulseOptimum:
    omega_d: float  # GHz
    e_amp: float
    p1: float
    sigma: float
    rounds: int
    converged: bool
    boundary: bool
    stationary_slope: float = float("nan")
    history: list = field(default_factory=list, repr=False)

    def rabi(self, model):
        return rabi_of(model, self.e_amp)


def default_pulse_brackets(model: SystemModel, sigma: float):
    e0 = pi_pulse_amplitude(sigma, model.dq.gamma)
    shift = to_ghz(_dq_shift(model, rabi_of(model, e0)))
    fq = to_ghz(model.omega_q)
    pad = 5e-4
    freq = (fq - 0.25 * abs(shift) - pad, fq + 1.25 * abs(shift) + pad)
    return freq, (0.7 * e0, 1.4 * e0)


class _Memo:
    def __init__(self, fn):
        self.fn = fn
        self.cache = {}

    def __call__(self, x):
        if x not in self.cache:
            self.cache[x] = self.fn(x)
        return self.cache[x]


def _local_max(f, x, half, lo, hi, tol):
    """Golden section on [x - half, x + half] clipped to [lo, hi]; re-centres
    when the optimum lands on an interior edge."""
    for _ in range(6):
        a, b = max(lo, x - half), min(hi, x + half)
        xb, yb, _ = golden_section_max(f, a, b, tol)
        at_low = xb - a < 2 * tol and a > lo
        at_high = b - xb < 2 * tol and b < hi
        if not (at_low or at_high):
            edge = (xb - lo < 2 * tol) or (hi - xb < 2 * tol)
            return xb, yb, edge
        x = xb
    edge = (xb - lo < 2 * tol) or (hi - xb < 2 * tol)
    return xb, yb, edge


def optimize_pulse(model: SystemModel, sigma: float, brackets=None, max_rounds=8,
                   improve_tol=1e-6, dt=None, check_stationary=True) -> PulseOptimum:
    """Coordinate descent over (drive frequency, amplitude) for p1 at t0 + 3 sigma.

    Round one scans each full bracket on a grid and refines by golden section;
    later rounds refine locally. Falls back to a 5x5 grid around the best
    point when descent does not settle within ``max_rounds``.
    """
    if brackets is None:
        brackets = default_pulse_brackets(model, sigma)
    (f_lo, f_hi), (a_lo, a_hi) = brackets
    e0 = pi_pulse_amplitude(sigma, model.dq.gamma)
    e_amp = min(max(e0, a_lo), a_hi)
    a_tol = AMP_RTOL * e0
    history = []

    def obj(fq, ea):
        return pulse_objective(fq, ea, model, sigma, dt)

    # round 1: global grid + golden on each axis
    fx = _Memo(lambda x: obj(x, e_amp))
    freq, p1, _ = bracketed_max(fx, f_lo, f_hi, FREQ_TOL_GHZ, n_grid=21)
    ax = _Memo(lambda a: obj(freq, a))
    e_amp, p1, _ = bracketed_max(ax, a_lo, a_hi, a_tol, n_grid=11)
    history.append((freq, e_amp, p1))
    f_half = 2 * (f_hi - f_lo) / 20
    a_half = 2 * (a_hi - a_lo) / 10

    converged = False
    boundary = False
    rounds = 1
    while rounds < max_rounds:
        rounds += 1
        f_half = max(f_half / 4, 10 * FREQ_TOL_GHZ)
        a_half = max(a_half / 4, 10 * a_tol)
        fx = _Memo(lambda x: obj(x, e_amp))
        fx.cache[freq] = p1
        freq_new, p_f, edge_f = _local_max(fx, freq, f_half, f_lo, f_hi, FREQ_TOL_GHZ)
        if p_f < p1:
            freq_new, p_f = freq, p1
        ax = _Memo(lambda a: obj(freq_new, a))
        ax.cache[e_amp] = p_f
        amp_new, p_a, edge_a = _local_max(ax, e_amp, a_half, a_lo, a_hi, a_tol)
        if p_a < p_f:
            amp_new, p_a = e_amp, p_f
        gain = p_a - p1
        freq, e_amp, p1 = freq_new, amp_new, p_a
        boundary = edge_f or edge_a
        history.append((freq, e_amp, p1))
        if gain < improve_tol:
            converged = True
            break

    if not converged:
        log.warning("pulse optimisation at sigma=%g did not settle in %d rounds; grid fallback",
                    sigma, max_rounds)
        grid = [(fq, ea) for fq in np.linspace(freq - f_half, freq + f_half, 5)
                for ea in np.linspace(e_amp - a_half, e_amp + a_half, 5)]
        for fq, ea in grid:
            val = obj(fq, ea)
            if val > p1:
                freq, e_amp, p1 = fq, ea, val
        history.append((freq, e_amp, p1))
    if boundary:
        warnings.warn(f"pulse optimum at sigma={sigma} lies on the search bracket edge")

    opt = PulseOptimum(freq, e_amp, p1, sigma, rounds, converged, boundary, history=history)
    if check_stationary and model.has_jqf:
        opt.stationary_slope = post_pulse_slope(model, opt, 50.0, dt)
    return opt


def pulse_trajectory(model, sigma, e_amp, freq_ghz, t_end=None, dt=None) -> Trajectory:
    if t_end is None:
        t_end = measurement_time(sigma)
    return evolve(model, pulse_envelope(e_amp, sigma), ghz(freq_ghz), SimConfig(t_end=t_end, dt=dt))


def post_pulse_slope(model, opt: PulseOptimum, window, dt=None):
    """dp1/dt fitted over [t_meas, t_meas + window]."""
    t_meas = measurement_time(opt.sigma)
    traj = pulse_trajectory(model, opt.sigma, opt.e_amp, opt.omega_d, t_meas + window, dt)
    return linear_slope(traj, t_meas)


def _sigma_point(sigma, model, dt):
    opt = optimize_pulse(model, sigma, dt=dt)
    return ScanRow(sigma, opt.omega_d, opt.e_amp, opt.p1, opt.boundary,
                   to_mhz(rabi_of(model, opt.e_amp)))


def two_level_baseline(model: SystemModel) -> SystemModel:
    return model.with_levels(2, 2)


def sweep_sigma(model: SystemModel, sigmas, dt=None, jobs=1, sink=None, baseline=True):
    """Optimised p1 versus pulse width for the model and its two-level baseline.

    Returns (full, baseline) ScanResults; baseline is None when disabled.
    """
    out = []
    for m in ([model, two_level_baseline(model)] if baseline else [model]):
        result = ScanResult(provenance=_provenance(kind="sweep_sigma", sigmas=list(sigmas),
                                                   specs=m.specs))
        out.append(_scan(list(sigmas), partial(_sigma_point, model=m, dt=dt), jobs, sink, result))
    return out[0], (out[1] if baseline else None)


def scan_alpha_pulse(model: SystemModel, alphas, sigma=10.0, dt=None, jobs=1, sink=None):
    result = ScanResult(provenance=_provenance(kind="scan_alpha_pulse", alphas=list(alphas),
                                               sigma=sigma, specs=model.specs))
    worker = partial(_alpha_point, model=model, rabi=None, tol=FREQ_TOL_GHZ, dt=dt,
                     mode="pulse", sigma=sigma)
    return _scan(list(alphas), worker, jobs, sink, result)


# -- cw versus pulse --------------------------------------------------------

@dataclass
class Comparison:
    pulse: Trajectory
    cw: Trajectory
    pulse_peak: float
    cw_peak: float
    omega_d_pulse: float  # GHz
    omega_d_cw: float  # GHz
    e_amp: float


def compare_cw_pulse(model: SystemModel, sigma=10.0, e_amp=None, omega_d_pulse=None,
                     omega_d_cw=None, horizon=None, dt=None) -> Comparison:
    """Gaussian pulse against a gaussian-ramped cw drive of the same height.

    Missing drive frequencies are optimised for each control separately, the
    pulse on p1 at t0 + 3 sigma and the cw drive on max_t p1.
    """
    if e_amp is None:
        opt = optimize_pulse(model, sigma, dt=dt, check_stationary=False)
        e_amp = opt.e_amp
        if omega_d_pulse is None:
            omega_d_pulse = opt.omega_d
    rabi = rabi_of(model, e_amp)
    ramp = GaussianRamp(e_amp, 2 * sigma, sigma)
    if horizon is None:
        horizon = ramp.t0 + 3 * rabi_period(rabi)
    if omega_d_pulse is None:
        (f_lo, f_hi), _ = default_pulse_brackets(model, sigma)
        fx = partial(_pulse_freq_objective, e_amp=e_amp, model=model, sigma=sigma, dt=dt)
        omega_d_pulse, _, _ = bracketed_max(fx, f_lo, f_hi, FREQ_TOL_GHZ)
    if omega_d_cw is None:
        omega_d_cw = find_resonance_cw(model, rabi, envelope=ramp, horizon=horizon, dt=dt).omega_d
    pulse = pulse_trajectory(model, sigma, e_amp, omega_d_pulse, horizon, dt)
    cw = evolve(model, ramp, ghz(omega_d_cw), SimConfig(t_end=horizon, dt=dt))
    return Comparison(pulse, cw, max_p1(pulse).p1, max_p1(cw).p1, omega_d_pulse, omega_d_cw, e_amp)


def _pulse_freq_objective(freq_ghz, e_amp, model, sigma, dt):
    return pulse_objective(freq_ghz, e_amp, model, sigma, dt)


# -- JQF truncation ---------------------------------------------------------

@dataclass
class TruncationStudy:
    result: ScanResult
    trajectories: dict


def njqf_study(model: SystemModel, n_jqf_list, sigma=10.0, e_amp=None, omega_d=None,
               dt=None) -> TruncationStudy:
    """Repeat one pulsed run at several JQF truncations, reading p1 at t0 + 3 sigma.

    Pulse parameters default to the optimum of ``model`` as given.
    """
    if not model.has_jqf:
        raise ValueError("JQF truncation study needs a model with a JQF")
    if any(n < 2 for n in n_jqf_list):
        raise ValueError("N_JQF must be >= 2")
    if e_amp is None or omega_d is None:
        opt = optimize_pulse(model, sigma, dt=dt, check_stationary=False)
        e_amp = opt.e_amp if e_amp is None else e_amp
        omega_d = opt.omega_d if omega_d is None else omega_d
    result = ScanResult(provenance=_provenance(kind="njqf", n=list(n_jqf_list), sigma=sigma,
                                               e_amp=e_amp, omega_d=omega_d, specs=model.specs))
    trajs = {}
    for n in n_jqf_list:
        traj = pulse_trajectory(model.with_levels(jqf_levels=n), sigma, e_amp, omega_d, dt=dt)
        trajs[n] = traj
        result.rows.append(ScanRow(n, omega_d, e_amp, float(traj.p1[-1]), False,
                                   to_mhz(rabi_of(model, e_amp))))
    return TruncationStudy(_finish(result), trajs)
