"""Unperturbed contour Green's functions of the atom-cavity system.

The symmetric block acts on (a, b_0, c_0); the k != 0 block on (b_k, c_k).
Public entry points take real frequencies.  The underscore-prefixed
``*_elements`` helpers accept complex or array arguments and are used for
vectorized sweeps and for evaluation at complex pole positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePoles, SingularMatrix
from .model import ModelParams, ensure_valid, updated

DEGENERACY_TOL = 1e-10
_COND_LIMIT = 1e14


@dataclass(frozen=True)
class GreenBlockSym:
    omega: float
    matrix: np.ndarray
    kind: str = "T"

    @property
    def aa(self) -> complex:
        return self.matrix[0, 0]

    @property
    def ac0(self) -> complex:
        return self.matrix[0, 2]

    @property
    def c0a(self) -> complex:
        return self.matrix[2, 0]

    @property
    def c0c0(self) -> complex:
        return self.matrix[2, 2]


@dataclass(frozen=True)
class GreenBlockK:
    omega: float
    matrix: np.ndarray
    kind: str = "T"

    @property
    def cc(self) -> complex:
        return self.matrix[1, 1]


@dataclass(frozen=True)
class AtomicPoles:
    poles: tuple[complex, complex]
    residues: tuple[complex, complex]


@dataclass(frozen=True)
class PolaritonEnergies:
    eps: tuple[float, float, float]


def coefficient_matrix_sym(params: ModelParams) -> np.ndarray:
    """Coefficient matrix M of d/dt (a, b_0, c_0) = M (a, b_0, c_0)."""
    p = ensure_valid(params)
    g, h = p.g_sqrt_n, p.half_omega
    return np.array(
        [
            [-p.Gc, -1j * g, 0.0],
            [-1j * g, -p.Ge, -1j * h],
            [0.0, -1j * h, -p.Gr],
        ],
        dtype=complex,
    )


def coefficient_matrix_k(params: ModelParams) -> np.ndarray:
    """Coefficient matrix of d/dt (b_k, c_k) for k != 0."""
    p = ensure_valid(params)
    h = p.half_omega
    return np.array([[-p.Ge, -1j * h], [-1j * h, -p.Gr]], dtype=complex)


def _invert(omega, M: np.ndarray) -> np.ndarray:
    A = omega * np.eye(M.shape[0]) - 1j * M
    if not np.all(np.isfinite(A)):
        raise SingularMatrix("non-finite propagator matrix")
    if np.linalg.cond(A) > _COND_LIMIT:
        raise SingularMatrix(f"(w - iM) is singular at w={omega!r}")
    return np.linalg.inv(A)


def green_sym(omega: float, params: ModelParams) -> GreenBlockSym:
    """Time-ordered Green's matrix (w - iM_0)^-1 over (a, b_0, c_0)."""
    if not np.isfinite(omega):
        raise ValueError("omega must be finite")
    return GreenBlockSym(float(omega), _invert(float(omega), coefficient_matrix_sym(params)))


def green_k(omega: float, params: ModelParams) -> GreenBlockK:
    """Time-ordered Green's matrix over (b_k, c_k), identical for every k != 0."""
    if not np.isfinite(omega):
        raise ValueError("omega must be finite")
    return GreenBlockK(float(omega), _invert(float(omega), coefficient_matrix_k(params)))


def green_antitime(G):
    """Anti-time-ordered block, G~[w] = -conj(G^T[w])."""
    if isinstance(G, (GreenBlockSym, GreenBlockK)):
        kind = {"T": "Tt", "Tt": "T"}.get(G.kind, G.kind)
        return type(G)(G.omega, -np.conj(G.matrix), kind)
    return -np.conj(G)


def green_greater(G):
    """Greater block, G^> = 2i Im G^T (the lesser function vanishes in vacuum)."""
    if isinstance(G, (GreenBlockSym, GreenBlockK)):
        return type(G)(G.omega, 2j * G.matrix.imag, ">")
    return 2j * np.imag(G)


# -- closed-form elements (vectorized, complex-capable) ----------------------


def sym_determinant(z, params: ModelParams):
    p = ensure_valid(params)
    z = np.asarray(z, dtype=complex)
    A, B, C = z + 1j * p.Gc, z + 1j * p.Ge, z + 1j * p.Gr
    g2, h2 = p.g_sqrt_n ** 2, p.half_omega ** 2
    return A * (B * C - h2) - g2 * C


def sym_elements(z, params: ModelParams) -> dict:
    """Cofactor expressions for the symmetric-block elements used downstream."""
    p = ensure_valid(params)
    z = np.asarray(z, dtype=complex)
    A, B, C = z + 1j * p.Gc, z + 1j * p.Ge, z + 1j * p.Gr
    g, h = p.g_sqrt_n, p.half_omega
    det = A * (B * C - h * h) - g * g * C
    return {
        "aa": (B * C - h * h) / det,
        "ac0": g * h / det,
        "c0c0": (A * B - g * g) / det,
    }


def cc_element(z, params: ModelParams):
    """No-hopping atomic propagator G_cc (the cc element of the k != 0 block)."""
    p = ensure_valid(params)
    z = np.asarray(z, dtype=complex)
    B, C = z + 1j * p.Ge, z + 1j * p.Gr
    return B / (B * C - p.half_omega ** 2)


def atomic_poles(params: ModelParams) -> AtomicPoles:
    """Poles and residues of G_cc; both poles lie in the lower half plane.

    The poles are ordered by increasing real part (ties by imaginary part).
    """
    p = ensure_valid(params)
    if p.gamma_e <= 0 and p.gamma_r <= 0:
        raise DegeneratePoles("no damping: poles are on the real axis")
    Ge, Gr, h = p.Ge, p.Gr, p.half_omega
    centre = -0.5j * (Ge + Gr)
    split = np.sqrt(complex(h * h - 0.25 * (Ge - Gr) ** 2))
    roots = sorted([centre - split, centre + split], key=lambda w: (w.real, w.imag))
    w1, w2 = roots
    if abs(w1 - w2) < DEGENERACY_TOL:
        raise DegeneratePoles(f"G_cc has a double pole at {w1!r}")
    res1 = (w1 + 1j * Ge) / (w1 - w2)
    res2 = (w2 + 1j * Ge) / (w2 - w1)
    return AtomicPoles((complex(w1), complex(w2)), (complex(res1), complex(res2)))


def single_excitation_hamiltonian(params: ModelParams) -> np.ndarray:
    p = ensure_valid(params)
    g, h = p.g_sqrt_n, p.half_omega
    return np.array(
        [
            [-p.delta_c, g, 0.0],
            [g, -p.delta_e, h],
            [0.0, h, -p.delta_r],
        ]
    )


def polariton_eigenvalues(params: ModelParams) -> PolaritonEnergies:
    """Sorted eigenvalues of the single-excitation Hamiltonian."""
    H = single_excitation_hamiltonian(params)
    eps = np.linalg.eigvalsh(H)
    scale = max(1.0, float(np.max(np.abs(H))))
    for e in eps:
        # characteristic polynomial residual, relative to the matrix scale
        res = abs(np.linalg.det(H - e * np.eye(3))) / scale ** 3
        if res > 1e-10:
            raise ArithmeticError(f"eigenvalue {e} has residual {res:.2e}")
    return PolaritonEnergies(tuple(float(e) for e in np.sort(eps)))


def polariton_sweep(omega_cf_grid, params: ModelParams) -> np.ndarray:
    """Eigenvalues for each control Rabi frequency, shape (len(grid), 3)."""
    return np.array([polariton_eigenvalues(updated(params, omega_cf=float(o))).eps for o in omega_cf_grid])
