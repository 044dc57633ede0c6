"""Peak p1 of a lossless, resonantly driven three-level transmon versus the
closed-form ceiling b^2/s^2, as a function of anharmonicity.

The ceiling neglects the fast beat with the far-detuned dressed state; at
small |alpha| that beat lifts the true maximum above it.
"""
import numpy as np
from scipy.linalg import eigh

from jqfsim import analytic
from jqfsim.units import ghz, mhz, to_mhz

OMEGA = ghz(5.0)
RABI = mhz(16.0)


def peak_population(alpha, t_end=150.0, n=150001):
    wd = analytic.exact_resonance(OMEGA, alpha, RABI)
    h = analytic.three_level_hamiltonian(OMEGA, wd, alpha, RABI)
    vals, vecs = eigh(h)
    psi0 = vecs.conj().T @ np.array([1.0, 0.0, 0.0])
    ts = np.linspace(0.0, t_end, n)
    amps = vecs[1] @ (psi0[:, None] * np.exp(-1j * np.outer(vals, ts)))
    return np.max(np.abs(amps) ** 2), analytic.p1_max_exact(RABI, alpha, OMEGA, wd)


if __name__ == "__main__":
    print("alpha_MHz  p1_peak_unitary  p1_ceiling  excess")
    for a in (-1000, -600, -450, -300, -200, -150):
        peak, ceil = peak_population(mhz(a))
        print(f"{a:9.0f}  {peak:.6f}         {ceil:.6f}    {peak - ceil:+.2e}")
