"""Linear <-> angular frequency conversion.

Internal quantities are angular frequencies in rad/ns and times in ns.
Linear frequencies (GHz, MHz) only appear at the user-facing boundary.
"""
import math

TWO_PI = 2.0 * math.pi


def ghz(f_ghz):
    """Linear GHz to rad/ns."""
    return TWO_PI * f_ghz


def mhz(f_mhz):
    """Linear MHz to rad/ns."""
    return TWO_PI * f_mhz * 1e-3


def to_ghz(w):
    return w / TWO_PI


def to_mhz(w):
    return w / TWO_PI * 1e3
