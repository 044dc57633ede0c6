"""Bracketed scalar maximisation: coarse grid pre-scan then golden section."""
from __future__ import annotations

import math
from typing import Callable, NamedTuple, Sequence

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2


class BoundaryError(RuntimeError):
    """The maximum sits on the edge of the search bracket."""

    def __init__(self, message, scan=None):
        super().__init__(message)
        self.scan = scan


class ScanPoint(NamedTuple):
    x: float
    y: float


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float):
    """Maximise a unimodal f on [a, b] until the bracket is narrower than tol.

    Returns (x_best, f_best, n_evals). Ties go to the lower abscissa.
    """
    if b < a:
        a, b = b, a
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        evals += 1
    return (c, fc, evals) if fc >= fd else (d, fd, evals)


def grid_scan(f, xs: Sequence[float], mapper=map) -> list[ScanPoint]:
    return [ScanPoint(float(x), float(y)) for x, y in zip(xs, mapper(f, xs))]


def bracketed_max(f, lo: float, hi: float, tol: float, n_grid: int = 21, mapper=map):
    """Grid pre-scan on [lo, hi], then golden section between the neighbours of
    the best grid point. Raises BoundaryError if the grid peaks at an edge.
    """
    xs = np.linspace(lo, hi, n_grid)
    scan = grid_scan(f, xs, mapper)
    ys = np.array([p.y for p in scan])
    i = int(np.argmax(ys))
    if i == 0 or i == n_grid - 1:
        raise BoundaryError(f"maximum at bracket edge x={xs[i]:.9g}", scan)
    x, y, _ = golden_section_max(f, xs[i - 1], xs[i + 1], tol)
    if ys[i] > y:
        x, y = float(xs[i]), float(ys[i])
    return x, y, scan
