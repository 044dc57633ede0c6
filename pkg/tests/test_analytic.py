import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from jqfsim import analytic as an
from jqfsim.units import ghz, mhz, to_mhz

W = ghz(5.0)
ALPHA = mhz(-300.0)
RABI = mhz(16.0)

alphas = st.floats(-1000.0, -100.0).map(mhz)
rabis = st.floats(0.5, 40.0).map(mhz)
detunings = st.floats(-20.0, 20.0).map(mhz)


def test_dressed_energies_at_bare_resonance():
    ds = an.dressed_states(W, W, ALPHA, RABI)
    assert to_mhz(ds.a) == pytest.approx(150.0)
    assert to_mhz(ds.b) == pytest.approx(22.627417, abs=1e-6)
    # independent oracle: eigenvalues of the |1>,|2> block
    ref = np.linalg.eigvalsh(an.two_level_block(W, W, ALPHA, RABI))
    assert to_mhz(ds.e_plus) == pytest.approx(to_mhz(ref[1]), abs=1e-9)
    assert to_mhz(ds.e_minus) == pytest.approx(to_mhz(ref[0]), abs=1e-9)
    assert to_mhz(ds.e_plus) == pytest.approx(1.69710, abs=1e-4)
    assert to_mhz(ds.e_plus) == pytest.approx(1.696, abs=2e-3)
    assert to_mhz(ds.e_minus) == pytest.approx(-301.6971, abs=1e-4)


def test_undriven_levels():
    ds = an.dressed_states(W, W, ALPHA, 0.0)
    assert ds.e_plus == pytest.approx(0.0) and ds.e_minus == pytest.approx(ALPHA)
    assert ds.theta_plus == 0.0


@given(detunings, alphas, rabis)
def test_dressed_states_are_eigenvectors(delta, alpha, rabi):
    h2 = an.two_level_block(W, W + delta, alpha, rabi)
    ds = an.dressed_states(W, W + delta, alpha, rabi)
    for branch, e in (("+", ds.e_plus), ("-", ds.e_minus)):
        for v in (ds.amplitudes(branch), ds.angle_vector(branch)):
            assert np.linalg.norm(h2 @ v - e * v) < 1e-12 * max(1.0, abs(e))


@given(detunings, alphas, rabis)
def test_plus_branch_connects_to_bare_one(delta, alpha, rabi):
    ds = an.dressed_states(W, W + delta, alpha, rabi)
    assert abs(ds.amplitudes("+")[0]) > abs(ds.amplitudes("+")[1])
    assert ds.amplitudes("+")[0] ** 2 == pytest.approx(ds.b**2 / ds.s**2, rel=1e-12)


def test_resonance_shift():
    assert to_mhz(an.resonance_shift(RABI, ALPHA)) == pytest.approx(1.70667, abs=1e-5)
    with pytest.raises(ZeroDivisionError):
        an.resonance_shift(RABI, 0.0)


def test_shift_leaves_fourth_order_residual():
    wd = W + an.resonance_shift(RABI, ALPHA)
    # |1>,|2> block: the dressed level sits at zero up to O(Omega^4 / alpha^3)
    ev2 = np.linalg.eigvalsh(an.two_level_block(W, wd, ALPHA, RABI))
    assert to_mhz(np.min(np.abs(ev2))) < 0.1
    # full 3x3: the |0>,|+> Rabi doublet is centred on zero to the same order
    ev3 = sorted(np.linalg.eigvalsh(an.three_level_hamiltonian(W, wd, ALPHA, RABI)), key=abs)
    assert abs(to_mhz(ev3[0] + ev3[1])) / 2 < 0.1
    assert abs(to_mhz(ev3[1] - ev3[0])) == pytest.approx(2 * 16.0, rel=0.01)


def test_exact_resonance_solves_e_plus():
    wd = an.exact_resonance(W, ALPHA, RABI)
    assert abs(an.dressed_states(W, wd, ALPHA, RABI).e_plus) < mhz(1e-6)
    assert abs(to_mhz(wd - W) - 1.70667) < 0.05


def test_p1_limits():
    wd = W + an.resonance_shift(RABI, ALPHA)
    assert an.p1_max_exact(RABI, ALPHA, W, wd) == pytest.approx(0.99433, abs=2e-4)
    assert an.p1_max_approx(RABI, ALPHA) == pytest.approx(0.99431, abs=1e-5)
    assert an.p1_max_approx(mhz(23.7), ALPHA) == pytest.approx(0.98752, abs=1e-5)
    assert an.p1_max_approx(0.0, ALPHA) == 1.0
    assert an.p1_max_exact(0.0, ALPHA, W, W) == 1.0
    with pytest.raises(ZeroDivisionError):
        an.p1_max_approx(RABI, 0.0)


def test_p1_exact_monotone_in_rabi():
    vals = [an.p1_max_exact(mhz(r), ALPHA, W, W + an.resonance_shift(mhz(r), ALPHA))
            for r in np.linspace(1, 40, 60)]
    assert np.all(np.diff(vals) < 0)


@given(alphas)
def test_deficit_ratio_small_drive(alpha):
    rabi = 0.08 * abs(alpha)
    d_exact = 1 - an.p1_max_exact(rabi, alpha, W, W)
    d_approx = 1 - an.p1_max_approx(rabi, alpha)
    assert d_exact / d_approx == pytest.approx(1.0, abs=0.05)


def test_p1_exact_reference_values():
    # oracle: |<1|+>|^2 from eigh of the |1>,|2> block
    for wd, ref in ((W, 0.9944064), (W + an.resonance_shift(RABI, ALPHA), 0.9944685)):
        vals, vecs = np.linalg.eigh(an.two_level_block(W, wd, ALPHA, RABI))
        assert vecs[0, 1] ** 2 == pytest.approx(ref, abs=1e-7)
        assert an.p1_max_exact(RABI, ALPHA, W, wd) == pytest.approx(ref, abs=1e-7)


def test_sw_energies():
    ep, em = an.sw_effective_energies(0.0, ALPHA, RABI)
    assert to_mhz(ep) == pytest.approx(1.70667, abs=1e-5)
    assert ep + em == pytest.approx(ALPHA, abs=1e-12)
    assert an.sw_effective_energies(0.1, -2.0, 0.0) == (0.1, -2.0)
    with pytest.raises(an.DegenerateLevelsError):
        an.sw_effective_energies(1.0, 1.0, RABI)


@given(detunings, alphas, rabis)
def test_sw_trace_preserved(delta, alpha, rabi):
    e1, e2 = delta, 2 * delta + alpha
    ep, em = an.sw_effective_energies(e1, e2, rabi)
    assert ep + em == pytest.approx(e1 + e2, abs=1e-9)


def test_sw_agrees_with_dressed_energy():
    ds = an.dressed_states(W, W, ALPHA, RABI)
    ep, _ = an.sw_effective_energies(0.0, ALPHA, RABI)
    assert abs(to_mhz(ep - ds.e_plus)) < 0.05


def test_sw_deficit():
    assert an.sw_population_deficit(0.0, ALPHA, RABI) == pytest.approx(5.689e-3, abs=1e-6)
    assert an.sw_population_deficit(0.0, ALPHA, 0.0) == 0.0
    assert an.sw_population_deficit(0.0, ALPHA, RABI) == pytest.approx(
        1 - an.p1_max_approx(RABI, ALPHA), rel=1e-12)


def test_sw_deficit_vs_exact_at_five_percent_drive():
    rabi = 0.05 * abs(ALPHA)
    wd = W + an.resonance_shift(rabi, ALPHA)
    d = an.sw_population_deficit(W - wd, 2 * (W - wd) + ALPHA, rabi)
    assert abs(d - (1 - an.p1_max_exact(rabi, ALPHA, W, wd))) < 1e-5


def test_sw_deficit_fourth_order_scaling():
    # at omega_d = omega: 1 - b^2/s^2 = 2u - 12u^2 + ..., u = (Omega/alpha)^2
    for x in (0.005, 0.01, 0.02):
        rabi = x * abs(ALPHA)
        d = an.sw_population_deficit(0.0, ALPHA, rabi)
        resid = d - (1 - an.p1_max_exact(rabi, ALPHA, W, W))
        assert resid / x**4 == pytest.approx(12.0, rel=0.02)


def test_sw_transform_removes_one_two_coupling():
    e1, e2 = 0.0, ALPHA
    h = an.three_level_hamiltonian(W, W, ALPHA, RABI)
    hp = an.sw_transform(h, an.sw_generator(e1, e2, RABI))
    ep, em = an.sw_effective_energies(e1, e2, RABI)
    # residual 1-2 coupling and diagonal corrections are higher order in Omega/alpha
    scale = RABI * (RABI / abs(ALPHA)) ** 2
    assert abs(hp[1, 2]) < 5 * scale
    assert abs(hp[1, 1] - ep) < 5 * scale and abs(hp[2, 2] - em) < 5 * scale
    assert hp[0, 1] == pytest.approx(RABI, rel=0.01)
    assert np.allclose(an.sw_generator(e1, e2, RABI), -an.sw_generator(e1, e2, RABI).T)
