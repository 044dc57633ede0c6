"""Closed-form three-level model of a driven transmon.

Levels |0>, |1>, |2> in the frame rotating at omega_d, drive under RWA:

    H = [[0, W, 0], [W, d, sqrt2 W], [0, sqrt2 W, 2 d + alpha]],  d = omega - omega_d

The |1>,|2> block is diagonalised exactly (dressed states) and also
perturbatively by a Schrieffer-Wolff rotation. All rates in rad/ns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.optimize import bisect

SQRT2 = math.sqrt(2.0)


class DegenerateLevelsError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class ThreeLevelDressed:
    a: float
    b: float
    s: float
    e_plus: float
    e_minus: float
    theta_plus: float
    theta_minus: float

    @property
    def root(self):
        return math.hypot(self.a, self.b)

    def amplitudes(self, branch="+"):
        """(c1, c2) of the dressed state in the bare |1>, |2> basis.

        Written as (-b, a -/+ R)/s_branch; for "+" the normaliser is ``s``.
        """
        r = self.root
        if branch == "+":
            c = np.array([-self.b, self.a - r])
        elif branch == "-":
            c = np.array([-self.b, self.a + r])
        else:
            raise ValueError(branch)
        n = np.linalg.norm(c)
        if n == 0:
            # b = 0 and the branch coincides with a bare level
            th = self.theta_plus if branch == "+" else self.theta_minus
            return np.array([math.cos(th), math.sin(th)])
        return c / n

    def angle_vector(self, branch="+"):
        th = self.theta_plus if branch == "+" else self.theta_minus
        return np.array([math.cos(th), math.sin(th)])


def two_level_block(omega, omega_d, alpha, Omega):
    d = omega - omega_d
    return np.array([[d, SQRT2 * Omega], [SQRT2 * Omega, 2 * d + alpha]])


def three_level_hamiltonian(omega, omega_d, alpha, Omega):
    d = omega - omega_d
    return np.array(
        [[0.0, Omega, 0.0], [Omega, d, SQRT2 * Omega], [0.0, SQRT2 * Omega, 2 * d + alpha]]
    )


def dressed_states(omega, omega_d, alpha, Omega) -> ThreeLevelDressed:
    if Omega < 0:
        raise ValueError("Omega must be non-negative")
    d = omega - omega_d
    a = (-alpha - omega + omega_d) / 2
    b = SQRT2 * Omega
    r = math.hypot(a, b)
    # R - a without cancellation when b << a
    r_minus_a = b * b / (r + a) if a > 0 else r - a
    s = math.sqrt(2 * r * r_minus_a)
    centre = (3 * d + alpha) / 2
    if b == 0:
        # bare levels; |+> taken as |1> by continuity from Omega > 0 with a > 0
        th_p, th_m = 0.0, math.pi / 2
    else:
        # eigenvector of [[a, b], [b, -a]] for +/-R has tan(theta) = (-a +/- R)/b
        th_p = math.atan((-a + r) / b)
        th_m = math.atan((-a - r) / b) + math.pi
    return ThreeLevelDressed(a, b, s, centre + r, centre - r, th_p, th_m)


def resonance_shift(Omega, alpha):
    """omega_d - omega to O(Omega^2)."""
    if alpha == 0:
        raise ZeroDivisionError("no dispersive shift for a harmonic mode (alpha = 0)")
    return -2 * Omega**2 / alpha


def exact_resonance(omega, alpha, Omega, tol=2 * math.pi * 1e-9):
    """omega_d solving E_+ = 0 exactly; ``tol`` defaults to 1 Hz."""
    if Omega == 0:
        return omega
    guess = resonance_shift(Omega, alpha)
    f = lambda wd: dressed_states(omega, wd, alpha, Omega).e_plus
    lo, hi = omega + min(0.0, 4 * guess), omega + max(0.0, 4 * guess)
    return bisect(f, lo, hi, xtol=tol)


def p1_max_exact(Omega, alpha, omega, omega_d):
    """Peak |1> population of the |0> <-> |+> Rabi oscillation, b^2/s^2."""
    ds = dressed_states(omega, omega_d, alpha, Omega)
    if ds.s == 0:
        if ds.a > 0:
            return 1.0
        raise DegenerateLevelsError("s = 0 with a <= 0: mixing angle undefined")
    return ds.b**2 / ds.s**2


def p1_max_approx(Omega, alpha):
    if alpha == 0:
        raise ZeroDivisionError("alpha = 0")
    return 1 - 2 * Omega**2 / alpha**2


def _gap(eps1, eps2):
    gap = eps2 - eps1
    if gap == 0:
        raise DegenerateLevelsError("eps1 == eps2")
    return gap


def sw_effective_energies(eps1, eps2, Omega):
    """Diagonal of the Schrieffer-Wolff Hamiltonian on |1>, |2> to O(Omega^2).

    E_- carries the opposite shift to E_+ so that the trace is preserved.
    """
    gap = _gap(eps1, eps2)
    shift = 2 * Omega**2 / gap
    return eps1 - shift, eps2 + shift


def sw_population_deficit(eps1, eps2, Omega):
    """Weight of |2> in the dressed |+> state, (sqrt2 Omega / (eps2 - eps1))^2."""
    gap = _gap(eps1, eps2)
    return 2 * Omega**2 / gap**2


def sw_generator(eps1, eps2, Omega):
    """Anti-Hermitian S1 + S2 on the 3-level space (basis |0>,|1>,|2>)."""
    gap = _gap(eps1, eps2)
    s = np.zeros((3, 3))
    s1 = SQRT2 * Omega / gap
    s[1, 2], s[2, 1] = s1, -s1
    if eps2 != 0:
        s2 = SQRT2 * Omega**2 / (gap * eps2)
        s[0, 2], s[2, 0] = s2, -s2
    return s


def sw_transform(h, s):
    """exp(-S) H exp(S)."""
    return expm(-s) @ h @ expm(s)
