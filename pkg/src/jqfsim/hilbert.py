"""Dense operator algebra for truncated bosonic modes.

Subsystem order is fixed everywhere as (DQ, JQF): the data qubit is index 0
and the filter qubit index 1. Levels are indexed from 0.
"""
from __future__ import annotations

from functools import reduce

import numpy as np


class InvalidDimensionError(ValueError):
    pass


def annihilation(n_levels: int) -> np.ndarray:
    if n_levels < 2:
        raise InvalidDimensionError(f"need at least 2 levels, got {n_levels}")
    return np.diag(np.sqrt(np.arange(1, n_levels, dtype=float)), 1).astype(complex)


def number(n_levels: int) -> np.ndarray:
    return np.diag(np.arange(n_levels, dtype=float)).astype(complex)


def projector(level: int, n_levels: int) -> np.ndarray:
    if not 0 <= level < n_levels:
        raise ValueError(f"level {level} out of range for {n_levels} levels")
    p = np.zeros((n_levels, n_levels), dtype=complex)
    p[level, level] = 1.0
    return p


def embed(op: np.ndarray, index: int, dims: list[int]) -> np.ndarray:
    """Kronecker-embed ``op`` acting on subsystem ``index`` into the joint space."""
    op = np.asarray(op)
    if not 0 <= index < len(dims):
        raise InvalidDimensionError(f"subsystem index {index} out of range for dims {dims}")
    if op.ndim != 2 or op.shape != (dims[index], dims[index]):
        raise InvalidDimensionError(
            f"operator shape {op.shape} does not match subsystem dim {dims[index]}"
        )
    factors = [op if k == index else np.eye(d, dtype=complex) for k, d in enumerate(dims)]
    return reduce(np.kron, factors)


def expectation(rho: np.ndarray, op: np.ndarray) -> complex:
    if rho.shape != op.shape:
        raise InvalidDimensionError(f"shape mismatch: rho {rho.shape} vs op {op.shape}")
    # Tr(rho op) without forming the product
    return complex(np.einsum("ij,ji->", rho, op))


def basis_state(levels: list[int], dims: list[int]) -> np.ndarray:
    """Pure-state density matrix |levels><levels| on the joint space."""
    if len(levels) != len(dims):
        raise InvalidDimensionError("one level per subsystem required")
    kets = []
    for lv, d in zip(levels, dims):
        k = np.zeros(d, dtype=complex)
        k[lv] = 1.0
        kets.append(k)
    psi = reduce(np.kron, kets)
    return np.outer(psi, psi.conj())


def ground_state(dims: list[int]) -> np.ndarray:
    return basis_state([0] * len(dims), dims)


def hermiticity_error(rho: np.ndarray) -> float:
    return float(np.max(np.abs(rho - rho.conj().T)))


def min_eigenvalue(rho: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
