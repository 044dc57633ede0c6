"""Drive envelopes E_d(t) and pulse calculus.

Amplitudes are in sqrt(rad/ns): sqrt(2*gamma_1) * E_d is the angular Rabi
rate of the data qubit. Every envelope is zero for t < 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

FOUR_LN2 = 4.0 * math.log(2.0)
# integral of exp(-4 ln2 x^2) over the real line, per unit FWHM
GAUSS_AREA = math.sqrt(math.pi / FOUR_LN2)


def _check_amp(e_amp):
    if e_amp < 0:
        raise ValueError(f"e_amp must be non-negative, got {e_amp}")


def _check_sigma(sigma):
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")


@dataclass(frozen=True)
class CW:
    e_amp: float

    def __post_init__(self):
        _check_amp(self.e_amp)


@dataclass(frozen=True)
class Step:
    e_amp: float
    t0p: float

    def __post_init__(self):
        _check_amp(self.e_amp)


@dataclass(frozen=True)
class GaussianRamp:
    """Gaussian rise (FWHM sigma) that holds at e_amp from t0 on."""

    e_amp: float
    t0: float
    sigma: float

    def __post_init__(self):
        _check_amp(self.e_amp)
        _check_sigma(self.sigma)


@dataclass(frozen=True)
class Gaussian:
    """Gaussian pulse centred at t0; sigma is the FWHM."""

    e_amp: float
    t0: float
    sigma: float

    def __post_init__(self):
        _check_amp(self.e_amp)
        _check_sigma(self.sigma)


DriveEnvelope = Union[CW, Step, GaussianRamp, Gaussian]


def _gauss(e_amp, t0, sigma, t):
    return e_amp * np.exp(-FOUR_LN2 * (t - t0) ** 2 / sigma**2)


def envelope_value(env: DriveEnvelope, t):
    """E_d(t); accepts scalars or arrays."""
    t = np.asarray(t, dtype=float)
    on = t >= 0
    if isinstance(env, CW):
        val = np.full_like(t, env.e_amp)
    elif isinstance(env, Step):
        val = np.where(t >= env.t0p, env.e_amp, 0.0)
    elif isinstance(env, GaussianRamp):
        val = np.where(t < env.t0, _gauss(env.e_amp, env.t0, env.sigma, t), env.e_amp)
    elif isinstance(env, Gaussian):
        val = _gauss(env.e_amp, env.t0, env.sigma, t)
    else:
        raise TypeError(f"unknown envelope {env!r}")
    val = np.where(on, val, 0.0)
    return float(val) if val.ndim == 0 else val


def _gauss_integral(e_amp, t0, sigma, a, b):
    k = math.sqrt(FOUR_LN2) / sigma
    return e_amp * sigma * GAUSS_AREA / 2 * (math.erf(k * (b - t0)) - math.erf(k * (a - t0)))


def pulse_area(env: DriveEnvelope, t_end: float) -> float:
    """Integral of E_d from 0 to t_end."""
    if t_end < 0:
        raise ValueError("t_end must be >= 0")
    if isinstance(env, CW):
        return env.e_amp * t_end
    if isinstance(env, Step):
        return env.e_amp * max(0.0, t_end - max(env.t0p, 0.0))
    if isinstance(env, Gaussian):
        return _gauss_integral(env.e_amp, env.t0, env.sigma, 0.0, t_end)
    if isinstance(env, GaussianRamp):
        rise = _gauss_integral(env.e_amp, env.t0, env.sigma, 0.0, min(t_end, max(env.t0, 0.0)))
        return rise + env.e_amp * max(0.0, t_end - max(env.t0, 0.0))
    raise TypeError(f"unknown envelope {env!r}")


def matching_step_onset(ramp: GaussianRamp) -> float:
    """Step onset t0' giving the same area as ``ramp`` once both have plateaued."""
    rise = _gauss_integral(1.0, ramp.t0, ramp.sigma, 0.0, ramp.t0)
    return ramp.t0 - rise


def spectral_fwhm(sigma: float) -> float:
    """Frequency-domain FWHM (GHz) of a gaussian pulse with time FWHM sigma (ns)."""
    _check_sigma(sigma)
    return FOUR_LN2 / (math.pi * sigma)


def pi_pulse_amplitude(sigma: float, gamma1: float) -> float:
    """E_amp for which the gaussian area of 2*sqrt(2*gamma1)*E_d(t) equals pi."""
    _check_sigma(sigma)
    if not gamma1 > 0:
        raise ValueError("gamma1 must be positive")
    return math.pi / (2 * sigma * GAUSS_AREA * math.sqrt(2 * gamma1))


def amplitude_from_rabi(rabi: float, gamma1: float) -> float:
    """E_amp from an angular Rabi rate sqrt(2 gamma1) E_amp."""
    return rabi / math.sqrt(2 * gamma1)


def rabi_from_amplitude(e_amp: float, gamma1: float) -> float:
    return e_amp * math.sqrt(2 * gamma1)


def with_amplitude(env: DriveEnvelope, e_amp: float) -> DriveEnvelope:
    return replace(env, e_amp=e_amp)
