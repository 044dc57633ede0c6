"""Two-transmon system on a semi-infinite line: Hamiltonian, collective decay
matrix and the density-matrix equation of motion.

The waveguide has been eliminated under the free-evolution approximation, so
the qubits see a Markovian collective dissipator with matrix ``xi`` plus the
classical drive entering through per-qubit coefficients ``kappa``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .hilbert import InvalidDimensionError, annihilation, embed

log = logging.getLogger(__name__)

ROTATING = "rotating-rwa"
LAB = "lab"
FRAMES = (ROTATING, LAB)


@dataclass(frozen=True)
class TransmonSpec:
    """One anharmonic mode.

    omega, alpha, gamma are angular (rad/ns). ``phase`` is omega_q * l, the
    position of the qubit along the line measured from the mirror.
    """

    omega: float
    alpha: float
    gamma: float
    phase: float = 0.0
    n_levels: int = 2

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if self.n_levels < 2:
            raise InvalidDimensionError(f"n_levels must be >= 2, got {self.n_levels}")
        if self.alpha > 0:
            warnings.warn(f"positive anharmonicity {self.alpha} (transmons have alpha < 0)")


def coupling_matrix_xi(specs, omega_q=None) -> np.ndarray:
    """Collective decay/exchange matrix.

    xi_mn = sqrt(g_m g_n)/2 * (exp(i(phi_m + phi_n)) + exp(i|phi_m - phi_n|)).
    Phases already carry the factor omega_q, so ``omega_q`` is unused here and
    accepted only to keep the call symmetric with the model builder.
    """
    g = np.array([s.gamma for s in specs], dtype=float)
    ph = np.array([s.phase for s in specs], dtype=float)
    amp = np.sqrt(np.outer(g, g)) / 2
    return amp * (np.exp(1j * (ph[:, None] + ph[None, :])) + np.exp(1j * np.abs(ph[:, None] - ph[None, :])))


def drive_coefficient(spec: TransmonSpec) -> float:
    return float(np.sqrt(2 * spec.gamma) * np.cos(spec.phase))


def _mode_hamiltonian(omega, alpha, c):
    n = c.conj().T @ c
    eye = np.eye(c.shape[0])
    return omega * n + 0.5 * alpha * n @ (n - eye)


@dataclass(frozen=True, eq=False)
class SystemModel:
    specs: tuple
    omega_q: float
    dims: tuple
    xi: np.ndarray = field(repr=False)
    lowering_ops: tuple = field(repr=False)
    h_static: np.ndarray = field(repr=False)
    drive_coeffs: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return int(np.prod(self.dims))

    @property
    def has_jqf(self):
        return len(self.specs) > 1

    @property
    def dq(self) -> TransmonSpec:
        return self.specs[0]

    def with_levels(self, dq_levels=None, jqf_levels=None) -> "SystemModel":
        specs = list(self.specs)
        if dq_levels is not None:
            specs[0] = replace(specs[0], n_levels=dq_levels)
        if jqf_levels is not None and len(specs) > 1:
            specs[1] = replace(specs[1], n_levels=jqf_levels)
        return build_model(specs)

    def with_alpha(self, alpha) -> "SystemModel":
        """Same anharmonicity on every qubit, as in the alpha scans."""
        return build_model([replace(s, alpha=alpha) for s in self.specs])

    def without_jqf(self) -> "SystemModel":
        return build_model(self.specs[:1])


def build_model(specs) -> SystemModel:
    specs = tuple(specs)
    if not 1 <= len(specs) <= 2:
        raise InvalidDimensionError(f"expected DQ and optional JQF, got {len(specs)} specs")
    omega_q = specs[0].omega
    if any(not np.isclose(s.omega, omega_q) for s in specs[1:]):
        warnings.warn("qubit frequencies differ; using the DQ frequency as omega_q in xi")
    dims = tuple(s.n_levels for s in specs)
    ops = tuple(embed(annihilation(d), k, list(dims)) for k, d in enumerate(dims))
    h = sum(_mode_hamiltonian(s.omega, s.alpha, c) for s, c in zip(specs, ops))
    return SystemModel(
        specs=specs,
        omega_q=omega_q,
        dims=dims,
        xi=coupling_matrix_xi(specs, omega_q),
        lowering_ops=ops,
        h_static=h,
        drive_coeffs=np.array([drive_coefficient(s) for s in specs]),
    )


def hamiltonian_static(specs) -> np.ndarray:
    return build_model(specs).h_static


def hamiltonian_rotating(model: SystemModel, omega_d: float) -> np.ndarray:
    # replacing omega_m by omega_m - omega_d shifts H by -omega_d * N_total
    n_tot = sum(c.conj().T @ c for c in model.lowering_ops)
    return model.h_static - omega_d * n_tot


def drive_hamiltonian(model: SystemModel) -> np.ndarray:
    """sum_m kappa_m (c_m + c_m^dag); multiply by the instantaneous field."""
    return sum(k * (c + c.conj().T) for k, c in zip(model.drive_coeffs, model.lowering_ops))


def field_value(drive, t, omega_d, frame):
    """Scalar multiplying ``drive_hamiltonian`` at time t."""
    from .drives import envelope_value

    e = envelope_value(drive, t)
    if frame == ROTATING:
        return e
    if frame == LAB:
        return 2.0 * e * np.cos(omega_d * t)
    raise ValueError(f"unknown frame {frame!r}; expected one of {FRAMES}")


def hamiltonian(model, t, drive, omega_d, frame=ROTATING) -> np.ndarray:
    h0 = hamiltonian_rotating(model, omega_d) if frame == ROTATING else model.h_static
    return h0 + field_value(drive, t, omega_d, frame) * drive_hamiltonian(model)


def dissipator(rho, model: SystemModel) -> np.ndarray:
    out = np.zeros_like(rho)
    ops = model.lowering_ops
    for m, cm in enumerate(ops):
        cmd = cm.conj().T
        for n, cn in enumerate(ops):
            x = model.xi[m, n]
            if x == 0:
                continue
            cnd = cn.conj().T
            out += x * (cn @ rho @ cmd - cmd @ cn @ rho)
            out += np.conj(x) * (cm @ rho @ cnd - rho @ cnd @ cm)
    return out


def master_rhs(rho, t, model, drive, omega_d, frame=ROTATING) -> np.ndarray:
    """drho/dt: Schrodinger-picture adjoint of the qubit-only Heisenberg equation."""
    if rho.shape != (model.dim, model.dim):
        raise InvalidDimensionError(f"rho shape {rho.shape} does not match model dim {model.dim}")
    h = hamiltonian(model, t, drive, omega_d, frame)
    return -1j * (h @ rho - rho @ h) + dissipator(rho, model)


def heisenberg_rhs(op, t, model, drive, omega_d, frame=ROTATING) -> np.ndarray:
    """dO/dt for a system operator, written directly from the operator equation."""
    h = hamiltonian(model, t, drive, omega_d, frame)
    out = 1j * (h @ op - op @ h)
    ops = model.lowering_ops
    for m, cm in enumerate(ops):
        cmd = cm.conj().T
        for n, cn in enumerate(ops):
            cnd = cn.conj().T
            x = model.xi[m, n]
            out += x * (cmd @ op - op @ cmd) @ cn
            out -= np.conj(x) * cnd @ (cm @ op - op @ cm)
    return out


def _vec_left(a, eye):
    # row-major vec: vec(A rho) = (A kron I) vec(rho)
    return np.kron(a, eye)


def _vec_right(b, eye):
    # vec(rho B) = (I kron B^T) vec(rho)
    return np.kron(eye, b.T)


def liouvillian(model: SystemModel, omega_d: float, frame=ROTATING):
    """Superoperators (L0, L1) with vec(drho/dt) = (L0 + f(t) L1) vec(rho).

    f(t) is ``field_value``. Vectorisation is row-major (numpy ``ravel``).
    """
    if frame not in FRAMES:
        raise ValueError(f"unknown frame {frame!r}; expected one of {FRAMES}")
    eye = np.eye(model.dim)
    h0 = hamiltonian_rotating(model, omega_d) if frame == ROTATING else model.h_static
    l0 = -1j * (_vec_left(h0, eye) - _vec_right(h0, eye))
    ops = model.lowering_ops
    for m, cm in enumerate(ops):
        cmd = cm.conj().T
        for n, cn in enumerate(ops):
            x = model.xi[m, n]
            if x == 0:
                continue
            cnd = cn.conj().T
            l0 += x * (np.kron(cn, cmd.T) - _vec_left(cmd @ cn, eye))
            l0 += np.conj(x) * (np.kron(cm, cnd.T) - _vec_right(cnd @ cm, eye))
    hd = drive_hamiltonian(model)
    l1 = -1j * (_vec_left(hd, eye) - _vec_right(hd, eye))
    return l0, l1


def dark_state(model: SystemModel) -> np.ndarray:
    """Single-excitation state proportional to sqrt(g2)|1,0> + sqrt(g1)|0,1>."""
    if not model.has_jqf:
        raise InvalidDimensionError("dark state needs both qubits")
    g1, g2 = model.specs[0].gamma, model.specs[1].gamma
    d_dq, d_jqf = model.dims
    psi = np.zeros(model.dim, dtype=complex)
    psi[1 * d_jqf + 0] = np.sqrt(g2)
    psi[0 * d_jqf + 1] = np.sqrt(g1)
    return psi / np.linalg.norm(psi)


def collective_jump(model: SystemModel) -> np.ndarray:
    """sum_m sqrt(g_m) cos(phi_m) c_m; Re(xi) is its rank-one outer product."""
    return sum(
        np.sqrt(s.gamma) * np.cos(s.phase) * c for s, c in zip(model.specs, model.lowering_ops)
    )
