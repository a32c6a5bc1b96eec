"""Two-polariton scattering: bubble, blockade T-matrices and pair correlation."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .constants import BLOCKADE_PREFACTOR, SQRT_2PI, TWO_PI
from .errors import (
    ConvergenceFailure,
    DegeneratePoles,
    ResonantDenominator,
    ToleranceNotMet,
    WrongSignC6,
    ZeroBubble,
)
from .greens import (
    DEGENERACY_TOL,
    atomic_poles,
    cc_element,
    coefficient_matrix_k,
    coefficient_matrix_sym,
    sym_elements,
)
from .model import LatticeSpec, ModelParams, ValidatedParams, ensure_valid, validate

POLISH_TOL = 1e-10


class Sector(str, enum.Enum):
    SYMMETRIC = "symmetric"
    NONSYMMETRIC = "nonsymmetric"


@dataclass(frozen=True)
class Bubble:
    omega_total: float
    value: complex
    sector: Sector


@dataclass(frozen=True)
class TMatrixScalar:
    tring0: complex
    t0: complex


@dataclass(frozen=True)
class PairAmplitude:
    omega_out: float
    value: complex
    # <a>^(1) <a>^(1) in the time domain; lives on the delta(w1) delta(w2) shell
    linear: complex


# -- poles and residues of the sector propagators -----------------------------


def _sector_propagator(z, sector: Sector, p: ValidatedParams):
    if sector is Sector.NONSYMMETRIC:
        return cc_element(z, p)
    return sym_elements(z, p)["c0c0"]


def _symmetric_cubic(p: ValidatedParams) -> np.poly1d:
    A = np.poly1d([1.0, 1j * p.Gc])
    B = np.poly1d([1.0, 1j * p.Ge])
    C = np.poly1d([1.0, 1j * p.Gr])
    return A * (B * C - p.half_omega ** 2) - p.g_sqrt_n ** 2 * C


@lru_cache(maxsize=512)
def _sector_poles_cached(sector: Sector, p: ValidatedParams):
    if sector is Sector.NONSYMMETRIC:
        ap = atomic_poles(p)
        return np.array(ap.poles), np.array(ap.residues)

    # roots of det(w - iM_0) are the eigenvalues of iM_0; polish them on the cubic
    cubic = _symmetric_cubic(p)
    dcubic = cubic.deriv()
    roots = np.linalg.eigvals(1j * coefficient_matrix_sym(p))
    scale = max(1.0, float(np.max(np.abs(roots))))
    for _ in range(3):
        roots = roots - cubic(roots) / dcubic(roots)
    residual = np.max(np.abs(cubic(roots))) / scale ** 3
    if not np.isfinite(residual) or residual > POLISH_TOL:
        raise ConvergenceFailure(f"cubic root polish residual {residual:.2e}")
    for i in range(3):
        for j in range(i + 1, 3):
            if abs(roots[i] - roots[j]) < DEGENERACY_TOL:
                raise DegeneratePoles(f"symmetric block has a double pole near {roots[i]!r}")
    roots = np.array(sorted(roots, key=lambda w: (w.real, w.imag)))
    A, B = roots + 1j * p.Gc, roots + 1j * p.Ge
    residues = (A * B - p.g_sqrt_n ** 2) / dcubic(roots)
    return roots, residues


def sector_poles(sector, params: ModelParams):
    """(poles, residues) of the cc propagator of the given sector."""
    return _sector_poles_cached(Sector(sector), ensure_valid(params))


# -- bubble -------------------------------------------------------------------


def bubble_values(z, sector, params: ModelParams):
    """S(z) = (1/2pi) int dxi G[xi] G[z - xi], closed by residues.

    Only the poles of G[z - xi] lie in the upper half plane; picking them up
    gives S(z) = -i sum_j r_j G[z - w_j].  Valid for array and complex ``z``
    as the analytic continuation from the real axis.
    """
    p = ensure_valid(params)
    sector = Sector(sector)
    poles, res = sector_poles(sector, p)
    z = np.asarray(z, dtype=complex)
    total = np.zeros_like(z)
    for w, r in zip(poles, res):
        total = total + r * _sector_propagator(z - w, sector, p)
    return -1j * total


def bubble(omega_total: float, sector, params: ModelParams) -> Bubble:
    """Polariton bubble at real total frequency."""
    value = complex(bubble_values(float(omega_total), sector, params))
    return Bubble(float(omega_total), value, Sector(sector))


def _scalar_propagator(sector: Sector, p: ValidatedParams):
    """Plain-Python cc propagator; keeps the quadrature integrand cheap."""
    iGc, iGe, iGr = 1j * p.Gc, 1j * p.Ge, 1j * p.Gr
    g2, h2 = p.g_sqrt_n ** 2, p.half_omega ** 2
    if sector is Sector.NONSYMMETRIC:
        def G(x):
            B = x + iGe
            return B / (B * (x + iGr) - h2)
    else:
        def G(x):
            A, B = x + iGc, x + iGe
            AB = A * B - g2
            return AB / (AB * (x + iGr) - A * h2)
    return G


def _tail_moments(M: np.ndarray, shift: complex, index: int, order: int):
    """(cc) elements of powers of the resolvent expansion matrix."""
    A = 1j * M
    n = A.shape[0]
    out_fwd, out_bwd = [], []
    P = np.eye(n, dtype=complex)
    Q = np.eye(n, dtype=complex)
    B = shift * np.eye(n) - A
    for _ in range(order + 1):
        out_fwd.append(P[index, index])
        out_bwd.append(Q[index, index])
        P = P @ A
        Q = Q @ B
    return np.array(out_fwd), np.array(out_bwd)


def bubble_quadrature_oracle(omega_total: float, sector, params: ModelParams, tol: float = 1e-9) -> complex:
    """Direct adaptive quadrature of the bubble integral (slow, test-only).

    Integrates over (-W, W) with breakpoints at the propagator resonances and
    adds the analytic large-|xi| tail from the 1/xi expansion of both
    propagators.
    """
    p = ensure_valid(params)
    sector = Sector(sector)
    wt = float(omega_total)
    if sector is Sector.NONSYMMETRIC:
        M, idx = coefficient_matrix_k(p), 1
    else:
        M, idx = coefficient_matrix_sym(p), 2
    # resonance locations from the coefficient matrix, not from the pole finder
    res_re = np.imag(np.linalg.eigvals(M))
    scale = max(1.0, float(np.max(np.abs(np.linalg.eigvals(M)))), abs(wt))
    R = 50.0 * scale
    W = 1e3 * scale
    breaks = sorted({0.0, wt, *(-res_re).tolist(), *(wt + res_re).tolist()})
    breaks = [b for b in breaks if -R < b < R]

    G = _scalar_propagator(sector, p)

    def f(xi):
        return G(xi) * G(wt - xi)

    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        # roundoff warnings near the requested 1e-13 are expected; the summed
        # error estimate is checked below instead
        warnings.simplefilter("ignore", IntegrationWarning)
        for a, b, pts in ((-W, -R, None), (-R, R, breaks), (R, W, None)):
            for part in (np.real, np.imag):
                v, e = quad(lambda t: float(part(f(t))), a, b, points=pts, limit=2000, epsabs=1e-15, epsrel=1e-13)
                total += v if part is np.real else 1j * v
                err += e

    # G[xi] = sum m_n / xi^(n+1); G[wt - xi] = -sum m'_n / xi^(n+1)
    order = 8
    m, mp = _tail_moments(M, wt, idx, order)
    tail = 0.0
    for n in range(0, order + 1, 2):
        c_n = sum(m[k] * mp[n - k] for k in range(n + 1))
        tail += -c_n * 2.0 / ((n + 1) * W ** (n + 1))
    value = (total + tail) / TWO_PI
    if err / TWO_PI > tol * max(abs(value), 1e-300):
        raise ToleranceNotMet(f"quadrature error estimate {err:.2e} exceeds tolerance")
    return complex(value)


# -- blockade T-matrix --------------------------------------------------------


def _require_attractive(p: ValidatedParams):
    # C6 = 0 is the non-interacting limit and gives T = 0
    if not p.c6 <= 0:
        raise WrongSignC6("closed-form blockade T-matrix requires C6 <= 0")


def tring_from_bubble(S, params: ModelParams):
    """-(2 pi^2 / 3V) sqrt(-i |C6| / S), principal branch, vectorized."""
    p = ensure_valid(params)
    _require_attractive(p)
    S = np.asarray(S, dtype=complex)
    if np.any(np.abs(S) == 0):
        raise ZeroBubble("bubble vanishes; blockade T-matrix undefined")
    return -(BLOCKADE_PREFACTOR / p.volume) * np.sqrt(-1j * abs(p.c6) / S)


def tring0_values(z, params: ModelParams):
    """No-hopping blockade T-matrix at (array/complex) total frequency ``z``."""
    return tring_from_bubble(bubble_values(z, Sector.NONSYMMETRIC, params), params)


def tring0(omega_total: float, params: ModelParams) -> complex:
    """Position-summed no-hopping T-matrix at real total frequency."""
    return complex(tring0_values(float(omega_total), params))


def tring0_radial_quadrature(omega_total: float, params: ModelParams) -> complex:
    """(1/V) int d^3R kappa/(1 - i S kappa) over a sphere of volume V."""
    p = ensure_valid(params)
    S = complex(bubble_values(float(omega_total), Sector.NONSYMMETRIC, p))
    radius = (3.0 * p.volume / (4.0 * math.pi)) ** (1.0 / 3.0)
    rb = abs(p.c6 * S) ** (1.0 / 6.0)

    def integrand(R):
        # kappa / (1 - i S kappa) = C6 / (R^6 - i S C6), regular at R = 0
        return 4.0 * math.pi * R * R * p.c6 / (R ** 6 - 1j * S * p.c6)

    pts = [x for x in (0.5 * rb, rb, 2.0 * rb, 5.0 * rb) if x < radius]
    re = quad(lambda R: integrand(R).real, 0.0, radius, points=pts, limit=500, epsrel=1e-12)[0]
    im = quad(lambda R: integrand(R).imag, 0.0, radius, points=pts, limit=500, epsrel=1e-12)[0]
    return complex(re + 1j * im) / p.volume


def tring_lattice_oracle(omega_total: float, params: ModelParams, lattice: LatticeSpec) -> complex:
    """(1/N) sum_i kappa(r_i) / (1 - i S kappa(r_i)) over a periodic lattice."""
    p = validate(params, lattice)
    S = complex(bubble_values(float(omega_total), Sector.NONSYMMETRIC, p))
    kappa = lattice.kappa(p.c6)
    return complex(np.sum(kappa / (1.0 - 1j * S * kappa)) / lattice.n_sites)


def u_fourier(K, lattice: LatticeSpec, params: ModelParams) -> complex:
    """U_K = (1/N) sum_m kappa(r_m) exp(i K.r_m), origin excluded."""
    p = ensure_valid(params)
    K = np.asarray(K, dtype=float)
    axes = []
    for d in lattice.dims:
        n = np.arange(d)
        axes.append(np.where(n <= d // 2, n, n - d) * lattice.step)
    x, y, z = np.meshgrid(*axes, indexing="ij")
    kappa = lattice.kappa(p.c6)
    phase = np.exp(1j * (K[0] * x + K[1] * y + K[2] * z))
    return complex(np.sum(kappa * phase) / lattice.n_sites)


def u_fourier_grid(lattice: LatticeSpec, params: ModelParams) -> np.ndarray:
    """U_K on the full reciprocal grid K = 2 pi n / (L step), indexed by n."""
    p = ensure_valid(params)
    return np.fft.ifftn(lattice.kappa(p.c6))


def t0_from(tring: complex, s_sym: complex, s_nonsym: complex) -> complex:
    """Hopping correction T_0 = T0r / (1 - i T0r (S_0 - S))."""
    den = 1.0 - 1j * tring * (s_sym - s_nonsym)
    if abs(den) < 1e-12:
        raise ResonantDenominator(f"|1 - i T (S0 - S)| = {abs(den):.2e}")
    return complex(tring / den)


def t0(params: ModelParams) -> complex:
    """Hopping-corrected blockade T-matrix at zero total frequency."""
    p = ensure_valid(params)
    s_non = complex(bubble_values(0.0, Sector.NONSYMMETRIC, p))
    # without cavity coupling the two sectors share one propagator
    s_sym = s_non if p.g_sqrt_n == 0 else complex(bubble_values(0.0, Sector.SYMMETRIC, p))
    return t0_from(tring_from_bubble(s_non, p).item(), s_sym, s_non)


def tmatrix_scalar(params: ModelParams) -> TMatrixScalar:
    return TMatrixScalar(tring0(0.0, params), t0(params))


def ladder_series_t0(params: ModelParams, lattice: LatticeSpec, tol: float = 1e-10, max_terms: int = 2000):
    """Sum T_0 = U_0 + i sum_q U_-q S_q U_q + ... term by term on a k-grid.

    Returns ``(value, n_terms)``.  The q = 0 bubble uses the symmetric
    sector, every other q the k != 0 sector.
    """
    p = validate(params, lattice)
    if lattice.n_sites > 6 ** 3 * 8:
        raise ValueError("ladder series oracle is meant for small lattices")
    U_grid = u_fourier_grid(lattice, p)
    dims = lattice.dims
    idx = np.array(np.unravel_index(np.arange(lattice.n_sites), dims)).T
    diff = (idx[:, None, :] - idx[None, :, :]) % np.array(dims)
    Umat = U_grid[diff[..., 0], diff[..., 1], diff[..., 2]]
    s_sym = complex(bubble_values(0.0, Sector.SYMMETRIC, p))
    s_non = complex(bubble_values(0.0, Sector.NONSYMMETRIC, p))
    D = np.full(lattice.n_sites, s_non, dtype=complex)
    D[0] = s_sym

    v = Umat[:, 0].copy()
    total = v[0]
    small = 0
    for n in range(1, max_terms):
        v = 1j * (Umat @ (D * v))
        total += v[0]
        if np.max(np.abs(v)) < tol * abs(total):
            small += 1
            if small >= 3:
                return complex(total), n + 1
        else:
            small = 0
    raise ConvergenceFailure("ladder series did not converge")


def ladder_closed_form_t0(params: ModelParams, lattice: LatticeSpec) -> complex:
    """Discrete-lattice T_0 from the hopping-corrected closed form."""
    p = validate(params, lattice)
    s_sym = complex(bubble_values(0.0, Sector.SYMMETRIC, p))
    s_non = complex(bubble_values(0.0, Sector.NONSYMMETRIC, p))
    return t0_from(tring_lattice_oracle(0.0, p, lattice), s_sym, s_non)


# -- pair correlation ---------------------------------------------------------


def pair_amplitude(omega_out: float, params: ModelParams, t_matrix: complex | None = None) -> PairAmplitude:
    """delta(w1 + w2) coefficient of the interaction part of <T a(w1) a(w2)>^(2).

    ``t_matrix`` overrides T_0 (e.g. with the bare U_0 for the first-order
    diagram).
    """
    p = ensure_valid(params)
    T = t0(p) if t_matrix is None else t_matrix
    w = float(omega_out)
    G = sym_elements(np.array([w, -w, 0.0]), p)
    g_out1, g_out2, g_in = G["ac0"]
    value = 1j * p.alpha ** 2 * g_out1 * g_out2 * T * g_in ** 2
    a1 = p.alpha * G["aa"][2]
    return PairAmplitude(w, complex(value), complex(a1 * a1))


def pair_first_order(omega_out: float, params: ModelParams, u0: complex) -> complex:
    """Single-interaction diagram of the pair function, written with its 2 pi factors."""
    p = ensure_valid(params)
    w = float(omega_out)
    G = sym_elements(np.array([w, -w, 0.0]), p)["ac0"]
    feed = (-1j * SQRT_2PI * p.alpha) ** 2
    vertex = -1j * u0 / TWO_PI
    return complex(feed * vertex * G[0] * G[1] * G[2] ** 2)
