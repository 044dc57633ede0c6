"""Run configuration files.

TOML with a fixed set of sections. User-facing units are linear: GHz for
qubit and drive frequencies, MHz for anharmonicity, coupling and Rabi rates,
ns for times, multiples of pi for position phases. Conversion to angular
units happens here and nowhere else.

    schema_version = 1

    [qubits.dq]            # data qubit
    freq_ghz = 5.0
    alpha_mhz = -300.0
    gamma_mhz = 0.002
    phase_pi = 0.0
    levels = 4

    [qubits.jqf]           # optional; omit for a bare DQ
    ...same keys...

    [drive]
    shape = "cw"           # cw | step | gaussian_ramp | gaussian | off
    rabi_mhz = 16.0        # sqrt(2 gamma_dq) E_amp / 2pi
    freq_ghz = 5.0017
    t0_ns = 20.0           # gaussian centre / ramp end
    sigma_ns = 10.0        # gaussian FWHM
    t0p_ns = 14.7          # step onset

    [sim]
    t_start_ns = 0.0
    t_end_ns = 100.0
    dt_ns = 0.005          # optional; automatic when omitted
    record_stride = 20     # optional
    frame = "rotating-rwa" # or "lab"
    dq_levels = 4          # optional truncation overrides
    jqf_levels = 2
    include_jqf = true

    [experiment]
    name = "resonance"     # plus the keys listed in EXPERIMENT_KEYS

    [output]
    dir = "out/fig2"
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .drives import CW, Gaussian, GaussianRamp, Step, amplitude_from_rabi
from .integrator import SimConfig
from .model import FRAMES, TransmonSpec
from .units import ghz, mhz

SCHEMA_VERSION = 1

QUBIT_KEYS = {"freq_ghz", "alpha_mhz", "gamma_mhz", "phase_pi", "levels"}
DRIVE_KEYS = {"shape", "rabi_mhz", "freq_ghz", "t0_ns", "sigma_ns", "t0p_ns"}
SIM_KEYS = {"t_start_ns", "t_end_ns", "dt_ns", "record_stride", "frame", "dq_levels",
            "jqf_levels", "include_jqf"}
EXPERIMENTS = ("simulate", "resonance", "scan-alpha", "optimize-pulse", "sweep-sigma",
               "compare", "njqf", "analytic")
EXPERIMENT_KEYS = {
    "name", "bracket_ghz", "alphas_mhz", "variant", "sigma_ns", "sigmas_ns", "n_jqf",
    "freq_bracket_ghz", "amp_bracket_mhz", "rabi_mhz", "freq_pulse_ghz", "freq_cw_ghz",
    "horizon_ns", "baseline",
}
TOP_KEYS = {"schema_version", "qubits", "drive", "sim", "experiment", "output"}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    params: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.params.get(key, default)


@dataclass
class RunConfig:
    dq: TransmonSpec
    jqf: TransmonSpec | None
    drive: object
    omega_d: float  # rad/ns
    sim: SimConfig
    experiment: ExperimentConfig
    output_dir: Path
    source: str = ""
    path: Path | None = None

    @property
    def specs(self):
        return [self.dq] if self.jqf is None else [self.dq, self.jqf]


def _check_keys(section: dict, allowed: set, where: str):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key '{where}{key}' (allowed: {', '.join(sorted(allowed))})")


def _num(section, key, where, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key '{where}{key}'")
        return default
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"'{where}{key}' must be a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"'{where}{key}' must be finite")
    return float(v)


def _int(section, key, where, default=None, minimum=None):
    if key not in section:
        return default
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"'{where}{key}' must be an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"'{where}{key}' must be >= {minimum}, got {v}")
    return v


def _num_list(section, key, where):
    v = section[key]
    if not isinstance(v, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                                          for x in v):
        raise ConfigError(f"'{where}{key}' must be a list of numbers")
    return [float(x) for x in v]


def _qubit(section, where) -> TransmonSpec:
    if not isinstance(section, dict):
        raise ConfigError(f"'{where}' must be a table")
    _check_keys(section, QUBIT_KEYS, where + ".")
    w = where + "."
    gamma = _num(section, "gamma_mhz", w, required=True)
    if gamma < 0:
        raise ConfigError(f"'{w}gamma_mhz' must be >= 0, got {gamma}")
    levels = _int(section, "levels", w, default=2, minimum=2)
    return TransmonSpec(
        omega=ghz(_num(section, "freq_ghz", w, required=True)),
        alpha=mhz(_num(section, "alpha_mhz", w, default=0.0)),
        gamma=mhz(gamma),
        phase=math.pi * _num(section, "phase_pi", w, default=0.0),
        n_levels=levels,
    )


def _drive(section, dq: TransmonSpec):
    _check_keys(section, DRIVE_KEYS, "drive.")
    shape = section.get("shape", "off")
    rabi = _num(section, "rabi_mhz", "drive.", default=0.0)
    if rabi < 0:
        raise ConfigError("'drive.rabi_mhz' must be >= 0")
    if shape != "off" and rabi > 0 and dq.gamma == 0:
        raise ConfigError("a drive needs qubits.dq.gamma_mhz > 0")
    e_amp = amplitude_from_rabi(mhz(rabi), dq.gamma) if rabi > 0 else 0.0
    sigma = _num(section, "sigma_ns", "drive.", default=None)
    t0 = _num(section, "t0_ns", "drive.", default=None)
    if shape in ("gaussian", "gaussian_ramp"):
        if sigma is None or sigma <= 0:
            raise ConfigError(f"drive shape '{shape}' needs drive.sigma_ns > 0")
        if t0 is None:
            t0 = 2 * sigma
    if shape == "off":
        return CW(0.0)
    if shape == "cw":
        return CW(e_amp)
    if shape == "step":
        return Step(e_amp, _num(section, "t0p_ns", "drive.", required=True))
    if shape == "gaussian_ramp":
        return GaussianRamp(e_amp, t0, sigma)
    if shape == "gaussian":
        return Gaussian(e_amp, t0, sigma)
    raise ConfigError(f"unknown drive.shape {shape!r}")


def _sim(section) -> SimConfig:
    _check_keys(section, SIM_KEYS, "sim.")
    frame = section.get("frame", "rotating-rwa")
    if frame not in FRAMES:
        raise ConfigError(f"'sim.frame' must be one of {FRAMES}, got {frame!r}")
    include = section.get("include_jqf", True)
    if not isinstance(include, bool):
        raise ConfigError("'sim.include_jqf' must be true or false")
    dt = _num(section, "dt_ns", "sim.")
    if dt is not None and dt <= 0:
        raise ConfigError("'sim.dt_ns' must be > 0")
    try:
        return SimConfig(
            t_start=_num(section, "t_start_ns", "sim.", default=0.0),
            t_end=_num(section, "t_end_ns", "sim.", default=100.0),
            dt=dt,
            record_stride=_int(section, "record_stride", "sim.", minimum=1),
            frame=frame,
            dq_levels=_int(section, "dq_levels", "sim.", minimum=2),
            jqf_levels=_int(section, "jqf_levels", "sim.", minimum=2),
            include_jqf=include,
        )
    except ValueError as err:
        raise ConfigError(f"[sim]: {err}") from None


def _experiment(section) -> ExperimentConfig:
    _check_keys(section, EXPERIMENT_KEYS, "experiment.")
    name = section.get("name", "simulate")
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment.name {name!r}; expected one of {EXPERIMENTS}")
    w = "experiment."
    params = {}
    for key in ("bracket_ghz", "freq_bracket_ghz", "amp_bracket_mhz"):
        if key in section:
            pair = _num_list(section, key, w)
            if len(pair) != 2 or not pair[0] < pair[1]:
                raise ConfigError(f"'{w}{key}' must be [low, high] with low < high")
            params[key] = tuple(pair)
    if "alphas_mhz" in section:
        alphas = _num_list(section, "alphas_mhz", w)
        if any(a == 0 for a in alphas):
            raise ConfigError(f"'{w}alphas_mhz' entries must be non-zero")
        params["alphas"] = [mhz(a) for a in alphas]
    if "sigmas_ns" in section:
        sigmas = _num_list(section, "sigmas_ns", w)
        if any(s <= 0 for s in sigmas):
            raise ConfigError(f"'{w}sigmas_ns' entries must be > 0")
        params["sigmas"] = sigmas
    if "n_jqf" in section:
        ns = section["n_jqf"]
        if not isinstance(ns, list) or not all(isinstance(n, int) and n >= 2 for n in ns):
            raise ConfigError(f"'{w}n_jqf' must be a list of integers >= 2")
        params["n_jqf"] = ns
    for key in ("sigma_ns", "freq_pulse_ghz", "freq_cw_ghz", "horizon_ns"):
        v = _num(section, key, w)
        if v is not None:
            if v <= 0:
                raise ConfigError(f"'{w}{key}' must be > 0")
            params[key] = v
    if "rabi_mhz" in section:
        params["rabi"] = mhz(_num(section, "rabi_mhz", w))
    if "variant" in section:
        if section["variant"] not in ("cw", "pulse"):
            raise ConfigError(f"'{w}variant' must be 'cw' or 'pulse'")
        params["variant"] = section["variant"]
    if "baseline" in section:
        if not isinstance(section["baseline"], bool):
            raise ConfigError(f"'{w}baseline' must be true or false")
        params["baseline"] = section["baseline"]
    return ExperimentConfig(name, params)


def loads(text: str, path: Path | None = None) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"{path or '<string>'}: {err}") from None
    _check_keys(raw, TOP_KEYS, "")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    qubits = raw.get("qubits")
    if not isinstance(qubits, dict) or "dq" not in qubits:
        raise ConfigError("missing required table [qubits.dq]")
    _check_keys(qubits, {"dq", "jqf"}, "qubits.")
    dq = _qubit(qubits["dq"], "qubits.dq")
    jqf = _qubit(qubits["jqf"], "qubits.jqf") if "jqf" in qubits else None
    drive_sec = raw.get("drive", {})
    drive = _drive(drive_sec, dq)
    freq = _num(drive_sec, "freq_ghz", "drive.", default=None)
    omega_d = ghz(freq) if freq is not None else dq.omega
    out_sec = raw.get("output", {})
    _check_keys(out_sec, {"dir"}, "output.")
    out = Path(out_sec.get("dir", "out"))  # relative to the working directory
    return RunConfig(dq, jqf, drive, omega_d, _sim(raw.get("sim", {})),
                     _experiment(raw.get("experiment", {})), out, text, path)


def parse_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return loads(path.read_text(), path)
