"""Fixed-step RK4 propagation of the master equation with observable recording."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.sparse import csr_matrix

from .drives import envelope_value
from .model import FRAMES, LAB, ROTATING, SystemModel, liouvillian

try:
    import numba
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False
else:
    HAVE_NUMBA = True

log = logging.getLogger(__name__)

TRACE_TOL = 1e-6
RESYMMETRIZE_EVERY = 1000
RECORD_INTERVAL = 0.1  # ns
MAX_DRIVE_PHASE = 0.12  # dt * peak drive rate
MAX_STATIC_PHASE = 0.3  # dt * spectral radius of the undriven generator
LAB_MAX_DT = 0.001  # ns; counter-rotating terms need finer steps
CSV_HEADER = ["t_ns", "p1", "p0", "p2", "p3", "trace_err", "neg"]


class NonConvergenceError(RuntimeError):
    pass


class NumericFailureError(FloatingPointError):
    pass


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    t_start: float = 0.0
    t_end: float = 100.0
    # None: pick from the fastest rate in the problem, see resolve_step
    dt: float | None = None
    # None: sample every RECORD_INTERVAL ns
    record_stride: int | None = None
    frame: str = ROTATING
    # None keeps the truncation already in the model
    dq_levels: int | None = None
    jqf_levels: int | None = None
    include_jqf: bool = True

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.record_stride is not None and self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.frame not in FRAMES:
            raise ValueError(f"frame must be one of {FRAMES}")

    def n_steps(self, dt):
        return int(round((self.t_end - self.t_start) / dt))


def configure_model(model: SystemModel, config: SimConfig) -> SystemModel:
    """Apply the truncation / JQF switch from ``config`` to ``model``."""
    if not config.include_jqf and model.has_jqf:
        model = model.without_jqf()
    if config.dq_levels is not None or config.jqf_levels is not None:
        model = model.with_levels(config.dq_levels, config.jqf_levels)
    return model


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    populations: np.ndarray  # shape (n_dq_levels, n_samples)
    trace_error: np.ndarray
    max_negativity: np.ndarray
    hermiticity: np.ndarray
    metadata: dict = field(default_factory=dict)
    final_state: np.ndarray | None = field(default=None, repr=False)

    @property
    def p1(self):
        return self.populations[1]

    def population(self, level):
        if level < self.populations.shape[0]:
            return self.populations[level]
        return np.zeros_like(self.times)

    def __len__(self):
        return len(self.times)

    def rows(self):
        cols = [self.times, self.p1, self.population(0), self.population(2), self.population(3)]
        cols += [self.trace_error, self.max_negativity]
        return zip(*cols)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for row in self.rows():
                w.writerow([f"{v:.12g}" for v in row])


def _dq_population_matrix(model: SystemModel) -> np.ndarray:
    """Rows pick the diagonal of vec(rho) summed over the JQF index."""
    d = model.dim
    n_dq = model.dims[0]
    rest = d // n_dq
    m = np.zeros((n_dq, d * d))
    for k in range(n_dq):
        for j in range(rest):
            i = k * rest + j
            m[k, i * d + i] = 1.0
    return m


def resolve_step(model: SystemModel, drive, omega_d: float, config: SimConfig,
                 l0: np.ndarray | None = None) -> tuple[float, int]:
    """(dt, record_stride) for a run.

    Automatic steps are RECORD_INTERVAL / k with the smallest k >= 10 keeping
    dt * (peak drive rate) and dt * (spectral radius of L0) under their caps.
    The strongly coupled JQF sees a Rabi rate sqrt(g2/g1) times that of the
    DQ, which is what usually sets k.
    """
    if config.dt is not None:
        dt = config.dt
        stride = config.record_stride or max(1, int(round(RECORD_INTERVAL / dt)))
        return dt, stride
    if l0 is None:
        l0 = liouvillian(model, omega_d, config.frame)[0]
    grid = np.linspace(config.t_start, config.t_end, 4001)
    peak = float(np.max(np.abs(envelope_value(drive, grid))))
    peak *= float(np.max(np.abs(model.drive_coeffs)))
    if config.frame == LAB:
        peak *= 2.0
    radius = float(np.max(np.abs(np.linalg.eigvals(l0))))
    k = max(10, math.ceil(RECORD_INTERVAL * peak / MAX_DRIVE_PHASE),
            math.ceil(RECORD_INTERVAL * radius / MAX_STATIC_PHASE))
    if config.frame == LAB:
        k = max(k, math.ceil(RECORD_INTERVAL / LAB_MAX_DT))
    return RECORD_INTERVAL / k, config.record_stride or k


def _csr(m):
    sp = csr_matrix(m)
    return sp.data.astype(complex), sp.indices.astype(np.int64), sp.indptr.astype(np.int64)


def _rk4_numpy(l0, l1, f, r, n, h, stride, resym_every, d):
    stacked = np.vstack([l0, l1])
    dd = d * d
    out = np.empty((n // stride + 1, dd), dtype=complex)

    def deriv(vec, fv):
        y = stacked @ vec
        return y[:dd] + fv * y[dd:]

    k = 0
    resym = 0
    for i in range(n + 1):
        if i % stride == 0:
            out[k] = r
            k += 1
        if i == n:
            break
        if i and i % resym_every == 0:
            rho = r.reshape(d, d)
            r = (0.5 * (rho + rho.conj().T)).ravel()
            resym += 1
        fa, fb, fc = f[2 * i], f[2 * i + 1], f[2 * i + 2]
        k1 = deriv(r, fa)
        k2 = deriv(r + (0.5 * h) * k1, fb)
        k3 = deriv(r + (0.5 * h) * k2, fb)
        k4 = deriv(r + h * k3, fc)
        r = r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return out, resym


if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _apply(d0, i0, p0, d1, i1, p1, fv, x, y):
        for row in range(y.shape[0]):
            acc0 = 0j
            for j in range(p0[row], p0[row + 1]):
                acc0 += d0[j] * x[i0[j]]
            acc1 = 0j
            for j in range(p1[row], p1[row + 1]):
                acc1 += d1[j] * x[i1[j]]
            y[row] = acc0 + fv * acc1

    @numba.njit(cache=True)
    def _rk4_kernel(d0, i0, p0, d1, i1, p1, f, r, n, h, stride, resym_every, d):
        dd = d * d
        out = np.empty((n // stride + 1, dd), dtype=np.complex128)
        k1 = np.empty(dd, dtype=np.complex128)
        k2 = np.empty(dd, dtype=np.complex128)
        k3 = np.empty(dd, dtype=np.complex128)
        k4 = np.empty(dd, dtype=np.complex128)
        tmp = np.empty(dd, dtype=np.complex128)
        r = r.copy()
        k = 0
        resym = 0
        for i in range(n + 1):
            if i % stride == 0:
                out[k] = r
                k += 1
            if i == n:
                break
            if i > 0 and i % resym_every == 0:
                for a in range(d):
                    for b in range(a, d):
                        v = 0.5 * (r[a * d + b] + np.conj(r[b * d + a]))
                        r[a * d + b] = v
                        r[b * d + a] = np.conj(v)
                resym += 1
            _apply(d0, i0, p0, d1, i1, p1, f[2 * i], r, k1)
            for q in range(dd):
                tmp[q] = r[q] + 0.5 * h * k1[q]
            _apply(d0, i0, p0, d1, i1, p1, f[2 * i + 1], tmp, k2)
            for q in range(dd):
                tmp[q] = r[q] + 0.5 * h * k2[q]
            _apply(d0, i0, p0, d1, i1, p1, f[2 * i + 1], tmp, k3)
            for q in range(dd):
                tmp[q] = r[q] + h * k3[q]
            _apply(d0, i0, p0, d1, i1, p1, f[2 * i + 2], tmp, k4)
            for q in range(dd):
                r[q] = r[q] + (h / 6.0) * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q])
        return out, resym


def evolve(model: SystemModel, drive, omega_d: float, config: SimConfig = SimConfig(),
           rho0: np.ndarray | None = None, backend: str = "auto") -> Trajectory:
    """Integrate from the joint ground state (or ``rho0``) and record DQ populations.

    ``backend`` is "numba", "numpy" or "auto" (numba when importable). Both
    run the same classic RK4 scheme on the vectorised generator.
    """
    d = model.dim
    l0, l1 = liouvillian(model, omega_d, config.frame)
    h, stride = resolve_step(model, drive, omega_d, config, l0)
    n = config.n_steps(h)
    t0 = config.t_start

    # field at t_k, t_k + h/2, t_k + h for every step
    half_grid = t0 + 0.5 * h * np.arange(2 * n + 1)
    f = np.asarray(envelope_value(drive, half_grid), dtype=float)
    if config.frame == LAB:
        f = 2.0 * f * np.cos(omega_d * half_grid)
    f = np.ascontiguousarray(f)

    if rho0 is None:
        r = np.zeros(d * d, dtype=complex)
        r[0] = 1.0
    else:
        r = np.array(rho0, dtype=complex).ravel()
        if r.size != d * d:
            raise ValueError("rho0 dimension does not match model")

    if backend == "auto":
        backend = "numba" if HAVE_NUMBA else "numpy"
    if backend == "numba":
        states, resym = _rk4_kernel(*_csr(l0), *_csr(l1), f, r, n, h, stride, RESYMMETRIZE_EVERY, d)
    elif backend == "numpy":
        states, resym = _rk4_numpy(l0, l1, f, r, n, h, stride, RESYMMETRIZE_EVERY, d)
    else:
        raise ValueError(f"unknown backend {backend!r}")

    times = t0 + h * stride * np.arange(states.shape[0])
    bad = ~np.all(np.isfinite(states), axis=1)
    if bad.any():
        raise NumericFailureError(f"non-finite density matrix at t={times[np.argmax(bad)]:.6g} ns")
    diag_idx = np.arange(d) * (d + 1)
    tr_err = np.abs(states[:, diag_idx].sum(axis=1) - 1.0)
    if tr_err.max() > TRACE_TOL:
        j = int(np.argmax(tr_err > TRACE_TOL))
        raise NonConvergenceError(
            f"trace error {tr_err[j]:.3g} at t={times[j]:.6g} ns; reduce dt (now {h:.4g})"
        )
    pops = (_dq_population_matrix(model) @ states.T).real
    rhos = states.reshape(-1, d, d)
    herm = np.max(np.abs(rhos - np.conj(np.swapaxes(rhos, 1, 2))), axis=(1, 2))
    sym = 0.5 * (rhos + np.conj(np.swapaxes(rhos, 1, 2)))
    neg = np.maximum(0.0, -np.linalg.eigvalsh(sym)[:, 0])

    if resym:
        log.debug("re-symmetrised rho %d times over %d steps", resym, n)
    meta = {
        "config": asdict(config),
        "dt": h,
        "record_stride": stride,
        "omega_d": omega_d,
        "drive": repr(drive),
        "dims": list(model.dims),
        "specs": [asdict(s) for s in model.specs],
        "resymmetrizations": int(resym),
        "backend": backend,
    }
    return Trajectory(times, pops, tr_err, neg, herm, meta, rhos[-1].copy())


class Peak(NamedTuple):
    t: float
    p1: float
    boundary: bool


def max_p1(traj: Trajectory) -> Peak:
    """Largest p1 with parabolic refinement through the bracketing samples."""
    p = np.asarray(traj.p1)
    t = np.asarray(traj.times)
    if p.size == 0:
        raise ValueError("empty trajectory")
    i = int(np.argmax(p))  # first occurrence, i.e. earliest time on ties
    if i == 0 or i == p.size - 1:
        return Peak(float(t[i]), float(p[i]), True)
    y0, y1, y2 = p[i - 1], p[i], p[i + 1]
    denom = y0 - 2 * y1 + y2
    if denom >= 0:
        return Peak(float(t[i]), float(y1), False)
    # assumes uniform sampling around the peak
    off = 0.5 * (y0 - y2) / denom
    step = t[i + 1] - t[i]
    return Peak(float(t[i] + off * step), float(y1 - 0.25 * (y0 - y2) * off), False)


def fit_exponential_decay(traj: Trajectory, t_fit_start: float, t_fit_end: float | None = None,
                          min_samples: int = 8) -> float:
    """Decay rate (1/ns) from a least-squares line through ln p1."""
    t = np.asarray(traj.times)
    mask = t >= t_fit_start
    if t_fit_end is not None:
        mask &= t <= t_fit_end
    if mask.sum() < min_samples:
        raise InsufficientDataError(f"{mask.sum()} samples in fit window, need {min_samples}")
    p = np.asarray(traj.p1)[mask]
    if np.any(p <= 0):
        raise ValueError("p1 must be positive over the fit window")
    slope = np.polyfit(t[mask], np.log(p), 1)[0]
    return float(-slope)


def linear_slope(traj: Trajectory, t_from: float, t_to: float | None = None) -> float:
    t = np.asarray(traj.times)
    mask = t >= t_from
    if t_to is not None:
        mask &= t <= t_to
    return float(np.polyfit(t[mask], np.asarray(traj.p1)[mask], 1)[0])


class StepHalving(NamedTuple):
    err_dt: float
    err_half: float
    ratio: float


def step_halving(model, drive, omega_d, config: SimConfig) -> StepHalving:
    """max|p1(dt) - p1(dt/2)| and the next halving; ratio ~16 for RK4."""
    dt, stride = resolve_step(model, drive, omega_d, config)
    runs = []
    for div in (1, 2, 4):
        cfg = SimConfig(
            t_start=config.t_start, t_end=config.t_end, dt=dt / div,
            record_stride=stride * div, frame=config.frame,
        )
        runs.append(evolve(model, drive, omega_d, cfg).p1)
    e1 = float(np.max(np.abs(runs[0] - runs[1])))
    e2 = float(np.max(np.abs(runs[1] - runs[2])))
    return StepHalving(e1, e2, e1 / e2 if e2 > 0 else math.inf)
