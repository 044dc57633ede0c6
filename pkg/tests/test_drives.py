import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jqfsim.drives import (CW, GAUSS_AREA, Gaussian, GaussianRamp, Step, amplitude_from_rabi,
                           envelope_value, matching_step_onset, pi_pulse_amplitude, pulse_area,
                           rabi_from_amplitude, spectral_fwhm, with_amplitude)
from jqfsim.units import mhz, to_mhz

pos = st.floats(0.5, 50.0)


def test_gauss_area_constant():
    assert GAUSS_AREA == pytest.approx(1.0644670, abs=1e-7)


def test_envelope_shapes():
    g = Gaussian(2.0, 20.0, 10.0)
    assert envelope_value(g, 20.0) == pytest.approx(2.0)
    assert envelope_value(g, 25.0) == pytest.approx(1.0)  # half maximum at t0 + sigma/2
    assert envelope_value(g, -1.0) == 0.0
    r = GaussianRamp(2.0, 20.0, 10.0)
    assert envelope_value(r, 50.0) == 2.0 and envelope_value(r, 15.0) == pytest.approx(1.0)
    s = Step(1.0, 5.0)
    assert envelope_value(s, 5.0) == 1.0 and envelope_value(s, 4.999) == 0.0
    assert np.all(envelope_value(CW(3.0), np.array([0.0, 7.0])) == 3.0)


def test_invalid_envelopes():
    with pytest.raises(ValueError):
        Gaussian(1.0, 20.0, 0.0)
    with pytest.raises(ValueError):
        CW(-1.0)


def test_full_gaussian_area():
    assert pulse_area(Gaussian(1.0, 100.0, 10.0), 300.0) == pytest.approx(10 * GAUSS_AREA, rel=1e-12)


@settings(deadline=None, max_examples=40)
@given(pos, pos, st.floats(0.0, 200.0))
def test_pulse_area_matches_quadrature(sigma, t0, t_end):
    from scipy.integrate import quad
    for env in (Gaussian(1.3, t0, sigma), GaussianRamp(1.3, t0, sigma)):
        ref = quad(lambda t: float(envelope_value(env, t)), 0.0, t_end, limit=400,
                   points=[t0] if t0 < t_end else None)[0] if t_end > 0 else 0.0
        assert pulse_area(env, t_end) == pytest.approx(ref, rel=1e-7, abs=1e-9)


def test_matching_step_onset():
    ramp = GaussianRamp(1.0, 20.0, 10.0)
    t0p = matching_step_onset(ramp)
    assert t0p == pytest.approx(14.7, abs=0.05)
    assert pulse_area(Step(1.0, t0p), 100.0) == pytest.approx(pulse_area(ramp, 100.0), rel=1e-12)


def test_spectral_fwhm():
    # linear frequency in GHz
    assert spectral_fwhm(10.0) * 1e3 == pytest.approx(88.25, abs=0.01)
    assert spectral_fwhm(5.0) * 1e3 == pytest.approx(176.5, abs=0.01)
    assert spectral_fwhm(10.0) == pytest.approx(4 * math.log(2) / (math.pi * 10.0), rel=1e-12)
    with pytest.raises(ValueError):
        spectral_fwhm(0.0)


@given(pos)
def test_pi_pulse_area(sigma):
    g1 = mhz(0.002)
    e = pi_pulse_amplitude(sigma, g1)
    area = 2 * math.sqrt(2 * g1) * pulse_area(Gaussian(e, 10 * sigma, sigma), 20 * sigma)
    assert area == pytest.approx(math.pi, rel=1e-9)


def test_rabi_conversion_roundtrip():
    g1 = mhz(0.002)
    e = amplitude_from_rabi(mhz(16.0), g1)
    assert to_mhz(rabi_from_amplitude(e, g1)) == pytest.approx(16.0)
    assert with_amplitude(Gaussian(1.0, 20.0, 10.0), e).e_amp == e
