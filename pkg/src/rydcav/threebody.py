"""Faddeev-component solver for the connected three-photon correlation.

Everything is position-summed: a component ``psi`` stands for
``N^-3 sum_{r1,r2,r3} psi_kl``.  With every pair T-matrix replaced by its
position average all three components coincide, so vectors are stored
with three equal entries and the B matrix has equal off-diagonals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.signal import find_peaks

from .constants import SQRT_2PI, TWO_PI
from .errors import ConvergenceFailure, SingularFaddeevSystem
from .greens import atomic_poles, cc_element, polariton_eigenvalues, sym_elements
from .grid import Shell, SpectralGrid, map_ordered
from .model import ModelParams, ensure_valid
from .twobody import Sector, bubble_values, tring0_values

COND_LIMIT = 1e12
RESIDUAL_LIMIT = 1e-8
_ONES = np.ones(3)

TringFn = Callable[[np.ndarray], np.ndarray]


def _default_tring(p) -> TringFn:
    return lambda z: tring0_values(z, p)


@dataclass(frozen=True)
class BMatrix:
    omega: complex
    matrix: np.ndarray


@dataclass(frozen=True)
class FaddeevSolution:
    poles: np.ndarray
    residues: np.ndarray
    pole_values: np.ndarray  # shape (2, 3)
    psi2_fn: Callable = field(repr=False)
    tring_fn: TringFn = field(repr=False)
    system_residual: float = 0.0
    condition: float = 1.0


@dataclass(frozen=True)
class ThreePhotonAmplitude:
    omega1: float
    omega2: float
    value: complex

    @property
    def omega3(self) -> float:
        return -self.omega1 - self.omega2


def bmatrix(omega, params: ModelParams, tring_fn: TringFn | None = None) -> BMatrix:
    """Zero-diagonal 3x3 matrix with every off-diagonal slot equal to T0r(w)."""
    p = ensure_valid(params)
    t = complex((tring_fn or _default_tring(p))(np.asarray(omega, dtype=complex)))
    m = t * (np.ones((3, 3)) - np.eye(3))
    return BMatrix(omega, m)


def _eta_values(z, p) -> np.ndarray:
    """Stack of eta_1, eta_2 at (complex/array) frequency z."""
    poles, res = atomic_poles(p).poles, atomic_poles(p).residues
    z = np.asarray(z, dtype=complex)
    return np.stack([r * cc_element(z - w, p) for w, r in zip(poles, res)])


def eta(j: int, omega, params: ModelParams) -> complex:
    """eta_j[w] = G_cc[w - w_pj] Res_{w_pj} G_cc."""
    if j not in (1, 2):
        raise ValueError("pole index j must be 1 or 2")
    return complex(_eta_values(omega, ensure_valid(params))[j - 1])


def _psi2_component(z, p, tring_fn: TringFn) -> np.ndarray:
    # B[-w] applied to T0r[0] (1,1,1) contributes the row sum 2 T0r[0] T0r[-w]
    z = np.asarray(z, dtype=complex)
    g = sym_elements(-z, p)["c0c0"]
    t_zero = tring_fn(np.asarray(0.0, dtype=complex))
    return 2.0 * (-1j / TWO_PI) ** 2 * 1j * g * t_zero * tring_fn(-z)


def psi2(omega, params: ModelParams, tring_fn: TringFn | None = None) -> np.ndarray:
    """Second-order position-summed Faddeev vector (three equal components)."""
    p = ensure_valid(params)
    c = _psi2_component(omega, p, tring_fn or _default_tring(p))
    return np.asarray(c)[..., None] * _ONES


def psi2_lattice_bruteforce(omega: float, params: ModelParams, lattice) -> np.ndarray:
    """Explicit position sum of the no-hopping second-order term on a lattice.

    Builds the pair T-matrix T(r_i - r_j) = kappa / (1 - i S kappa) for every
    site pair and evaluates N^-3 sum_{r1 r2 r3} of each component of
    (-i/2pi)^2 B[-w] i G_cc[-w] psi1.
    """
    from .model import validate

    p = validate(params, lattice)
    kappa = lattice.kappa(p.c6).ravel()
    n = kappa.size
    idx = np.array(np.unravel_index(np.arange(n), lattice.dims)).T
    diff = (idx[:, None, :] - idx[None, :, :]) % np.array(lattice.dims)
    flat = np.ravel_multi_index(diff.reshape(-1, 3).T, lattice.dims).reshape(n, n)
    pair_k = kappa[flat]

    def pair_t(w):
        s = complex(bubble_values(w, Sector.NONSYMMETRIC, p))
        return pair_k / (1.0 - 1j * s * pair_k)

    t_now, t_zero = pair_t(-omega), pair_t(0.0)
    g = complex(cc_element(-omega, p))
    pref = (-1j / TWO_PI) ** 2 * 1j * g
    # psi_12 = pref T12[-w] (T23[0] + T13[0]); sum over r3 first
    row_zero = t_zero.sum(axis=1)
    s12 = np.sum(t_now * (row_zero[None, :] + row_zero[:, None]))
    value = pref * s12 / n ** 3
    return np.full(3, value)


def _system_blocks(p, tring_fn: TringFn):
    poles = np.array(atomic_poles(p).poles)
    blocks = np.zeros((6, 6), dtype=complex)
    offdiag = np.ones((3, 3)) - np.eye(3)
    for a, wa in enumerate(poles):
        t = complex(tring_fn(np.asarray(-wa)))
        etas = _eta_values(-wa, p)
        for b in range(2):
            blocks[3 * a:3 * a + 3, 3 * b:3 * b + 3] = t * etas[b] * offdiag
    return poles, blocks


def solve_pole_values(
    params: ModelParams,
    tring_fn: TringFn | None = None,
    psi2_fn: Callable | None = None,
) -> FaddeevSolution:
    """Solve the 6x6 linear system for psi at the two atomic poles.

    ``tring_fn`` and ``psi2_fn`` replace the blockade T-matrix and the
    inhomogeneous term (test seams); both take complex frequency arrays.
    """
    p = ensure_valid(params)
    tring_fn = tring_fn or _default_tring(p)
    if psi2_fn is None:
        def psi2_fn(z, _p=p, _t=tring_fn):
            return np.asarray(_psi2_component(z, _p, _t))[..., None] * _ONES

    poles, blocks = _system_blocks(p, tring_fn)
    A = np.eye(6) - blocks
    rhs = np.concatenate([psi2_fn(np.asarray(w)) for w in poles])
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularFaddeevSystem(f"Faddeev system condition number {cond:.3e}")
    x = np.linalg.solve(A, rhs)
    x = x + np.linalg.solve(A, rhs - A @ x)  # one step of iterative refinement
    residual = float(np.max(np.abs(A @ x - rhs)) / max(np.max(np.abs(rhs)), 1e-300))
    if np.max(np.abs(rhs)) == 0:
        residual = float(np.max(np.abs(A @ x)))
    if residual > RESIDUAL_LIMIT:
        raise SingularFaddeevSystem(f"Faddeev solve residual {residual:.3e}")
    return FaddeevSolution(
        poles=poles,
        residues=np.array(atomic_poles(p).residues),
        pole_values=x.reshape(2, 3),
        psi2_fn=psi2_fn,
        tring_fn=tring_fn,
        system_residual=residual,
        condition=cond,
    )


def psi_values(z, solution: FaddeevSolution, params: ModelParams) -> np.ndarray:
    """Closed-form psi at (complex/array) z; trailing axis holds the 3 components."""
    p = ensure_valid(params)
    z = np.asarray(z, dtype=complex)
    t = solution.tring_fn(-z)
    etas = _eta_values(-z, p)
    mixed = etas[0][..., None] * solution.pole_values[0] + etas[1][..., None] * solution.pole_values[1]
    # B acting on a vector: each component gets T times the sum of the other two
    b_mixed = t[..., None] * (mixed.sum(axis=-1, keepdims=True) - mixed)
    return b_mixed + solution.psi2_fn(z)


def psi(omega, solution: FaddeevSolution, params: ModelParams) -> np.ndarray:
    """psi[w] = B[-w] (eta_1[-w] psi[w_p1] + eta_2[-w] psi[w_p2]) + psi2[w]."""
    return psi_values(omega, solution, params)


def fixed_point_residual(solution: FaddeevSolution, params: ModelParams) -> float:
    """max |psi(w_pj) - stored pole value|, relative to the pole values."""
    vals = psi_values(solution.poles, solution, params)
    scale = max(float(np.max(np.abs(solution.pole_values))), 1e-300)
    if np.max(np.abs(solution.pole_values)) == 0:
        return float(np.max(np.abs(vals)))
    return float(np.max(np.abs(vals - solution.pole_values)) / scale)


# -- iterative-series oracle --------------------------------------------------


class _PanelBasis:
    """Piecewise Gauss-Legendre representation of a function of theta,
    with xi = scale * tan(theta) mapping the real line onto (-pi/2, pi/2)."""

    def __init__(self, scale: float, n_center: int = 48, n_levels: int = 22, order: int = 12):
        self.scale = scale
        self.order = order
        self.x, self.w = np.polynomial.legendre.leggauss(order)
        # barycentric weights of the Legendre nodes
        diff = self.x[:, None] - self.x[None, :]
        np.fill_diagonal(diff, 1.0)
        self.bary = 1.0 / np.prod(diff, axis=1)
        edge = 1.35
        top = np.pi / 2
        inner = np.linspace(-edge, edge, n_center + 1)
        grade = top - (top - edge) * 0.5 ** np.arange(n_levels + 1)
        self.breaks = np.concatenate([-grade[::-1], inner[1:-1], grade])
        a, b = self.breaks[:-1], self.breaks[1:]
        self.theta = (0.5 * (b - a)[:, None] * self.x[None, :] + 0.5 * (a + b)[:, None]).ravel()
        self.xi = scale * np.tan(self.theta)
        self.size = self.theta.size

    def _interp_rows(self, theta: np.ndarray):
        """Panel index and Lagrange weights (n, order) for each theta."""
        panel = np.clip(np.searchsorted(self.breaks, theta, side="right") - 1, 0, self.breaks.size - 2)
        a, b = self.breaks[panel], self.breaks[panel + 1]
        t = (2 * theta - a - b) / (b - a)
        d = t[:, None] - self.x[None, :]
        exact = np.isclose(d, 0.0, atol=1e-15)
        d = np.where(exact, 1.0, d)
        lw = self.bary[None, :] / d
        lw = lw / lw.sum(axis=1, keepdims=True)
        hit = exact.any(axis=1)
        lw[hit] = exact[hit].astype(float)
        return panel, lw

    def integral_row(self, weight_fn, extra_xi, order: int = 12) -> np.ndarray:
        """Row r with sum_k r_k f(xi_k) ~ int dxi weight_fn(xi) f(xi).

        Panels are split at the theta images of ``extra_xi`` so that
        features of ``weight_fn`` away from the base nodes are resolved.
        """
        extra = np.arctan(np.asarray(extra_xi, dtype=float) / self.scale)
        br = np.unique(np.concatenate([self.breaks, extra]))
        x, w = np.polynomial.legendre.leggauss(order)
        a, b = br[:-1], br[1:]
        th = (0.5 * (b - a)[:, None] * x[None, :] + 0.5 * (a + b)[:, None]).ravel()
        wt = (0.5 * (b - a)[:, None] * w[None, :]).ravel()
        xi = self.scale * np.tan(th)
        jac = self.scale / np.cos(th) ** 2
        vals = weight_fn(xi) * wt * jac
        panel, lw = self._interp_rows(th)
        cols = panel[:, None] * self.order + np.arange(self.order)[None, :]
        contrib = vals[:, None] * lw
        row = np.zeros(self.size, dtype=complex)
        np.add.at(row, cols.ravel(), contrib.ravel())
        return row


_PEAK_OFFSETS = np.array([0.0, 0.03, 0.08, 0.2, 0.5, 1.2, 3.0, 8.0])


def kernel_gain(params: ModelParams, omega_grid=None) -> float:
    """max over real w of |2 T0r(-w)| (|eta_1(-w)| + |eta_2(-w)|)."""
    p = ensure_valid(params)
    w = np.linspace(-40, 40, 8001) if omega_grid is None else np.asarray(omega_grid, dtype=float)
    t = np.abs(tring0_values(-w, p))
    e = np.abs(_eta_values(-w, p)).sum(axis=0)
    return float(np.max(2 * t * e))


def psi_iterative_oracle(omegas, params: ModelParams, tol: float = 1e-8, max_terms: int = 200, basis: _PanelBasis | None = None):
    """Sum psi = psi2 + K psi2 + K^2 psi2 + ... with a quadrature kernel.

    K f(w) = (-i/2pi) B[-w] int dxi iG[-xi-w] iG[xi] f(xi).  Iterates are
    stored on a tan-mapped panel grid; each loop integral is a composite
    Gauss-Legendre rule refined around the moving resonance of G[-xi-w],
    with f interpolated inside the panels.  Returns ``(psi(omegas), n_terms)``.
    """
    p = ensure_valid(params)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    basis = basis or _PanelBasis(max(1.0, 0.5 * abs(p.omega_cf)))
    targets = np.concatenate([basis.xi, omegas])
    tring_fn = _default_tring(p)
    peaks = np.real(np.array(atomic_poles(p).poles))
    marks = np.concatenate([peaks + d for d in np.concatenate([-_PEAK_OFFSETS, _PEAK_OFFSETS])])
    kmat = np.empty((targets.size, basis.size), dtype=complex)
    for m, w in enumerate(targets):
        def weight(xi, w=w):
            return (-1j / TWO_PI) * (1j * cc_element(-xi - w, p)) * (1j * cc_element(xi, p))
        kmat[m] = basis.integral_row(weight, np.concatenate([-w - marks, marks]))
    bm = tring_fn(-targets)
    f = np.asarray(_psi2_component(targets, p, tring_fn))[:, None] * _ONES
    total = f.copy()
    m = basis.size
    small = 0
    for n in range(1, max_terms):
        loop = kmat @ f[:m]
        f = bm[:, None] * (loop.sum(axis=1, keepdims=True) - loop)
        total += f
        if np.max(np.abs(f[m:])) < tol * np.max(np.abs(total[m:])):
            small += 1
            if small >= 2:
                return total[m:], n + 1
        else:
            small = 0
    raise ConvergenceFailure("Faddeev iteration did not converge; reduce the kernel gain")


# -- a-posteriori pole check --------------------------------------------------


@dataclass
class PoleCheckReport:
    passed: bool
    singularities: list
    max_abs_psi_lower: float
    max_abs_psi_real: float
    scan_re: tuple
    scan_im: tuple

    @property
    def growth(self) -> float:
        if self.max_abs_psi_real == 0:
            return 0.0 if self.max_abs_psi_lower == 0 else float("inf")
        return self.max_abs_psi_lower / self.max_abs_psi_real

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "singularities": self.singularities,
            "max_abs_psi_lower": self.max_abs_psi_lower,
            "max_abs_psi_real": self.max_abs_psi_real,
            "growth": self.growth,
            "scan_re": list(self.scan_re),
            "scan_im": list(self.scan_im),
        }


def _bubble_numerator(p) -> np.poly1d:
    """Numerator of the no-hopping bubble as a rational function of z."""
    ap = atomic_poles(p)
    (p1, p2), (r1, r2) = ap.poles, ap.residues
    ge = p.Ge
    return r1 * np.poly1d([1, -p1 + 1j * ge]) * np.poly1d([1, -2 * p2]) + r2 * np.poly1d(
        [1, -p2 + 1j * ge]
    ) * np.poly1d([1, -2 * p1])


def _secant(f, z0, z1, tol=1e-13, maxiter=100):
    f0, f1 = f(z0), f(z1)
    for _ in range(maxiter):
        if f1 == f0:
            break
        z2 = z1 - f1 * (z1 - z0) / (f1 - f0)
        z0, f0, z1, f1 = z1, f1, z2, f(z2)
        if abs(z1 - z0) < tol * max(1.0, abs(z1)):
            return z1, abs(f1)
    return z1, abs(f1)


def verify_pole_assumption(solution: FaddeevSolution, params: ModelParams, scan_grid=None, im_min: float = -5.0, n_im: int = 101) -> PoleCheckReport:
    """Scan the analytic continuation of psi below the real axis.

    Reports zeros of the bubble (branch points of the T-matrix), crossings
    of the square-root branch cut, and zeros of the hopping denominator
    1 - i T0r (S0 - S), all mapped to the psi frequency w = -z.  Never
    raises; any internal failure is recorded as a singularity entry.
    """
    sing: list = []
    re = np.linspace(-10, 10, 201) if scan_grid is None else np.asarray(scan_grid, dtype=float)
    im = np.linspace(im_min, 0.0, n_im, endpoint=False)
    try:
        p = ensure_valid(params)
        W = re[None, :] + 1j * im[:, None]
        lo, hi = re.min(), re.max()

        def inside(w):
            return bool(im_min <= w.imag < 0 and lo <= w.real <= hi)

        # bubble zeros: S(-w) = 0 gives T0r(-w) -> infinity
        if abs(p.c6) > 0:
            for z in np.roots(_bubble_numerator(p)):
                w = -complex(z)
                if inside(w):
                    sing.append({"kind": "bubble_zero", "omega": [float(w.real), float(w.imag)]})

            S = bubble_values(-W, Sector.NONSYMMETRIC, p)
            arg = -1j * abs(p.c6) / S
            # principal sqrt is discontinuous where arg crosses the negative axis
            cross_r = (np.sign(arg.imag[:, 1:]) != np.sign(arg.imag[:, :-1])) & (arg.real[:, 1:] < 0) & (arg.real[:, :-1] < 0)
            cross_c = (np.sign(arg.imag[1:, :]) != np.sign(arg.imag[:-1, :])) & (arg.real[1:, :] < 0) & (arg.real[:-1, :] < 0)
            for i, j in zip(*np.nonzero(cross_r)):
                w = 0.5 * (W[i, j] + W[i, j + 1])
                sing.append({"kind": "branch_cut", "omega": [float(w.real), float(w.imag)]})
            for i, j in zip(*np.nonzero(cross_c)):
                w = 0.5 * (W[i, j] + W[i + 1, j])
                sing.append({"kind": "branch_cut", "omega": [float(w.real), float(w.imag)]})

            # hopping denominator, localized by secant refinement of grid minima
            def den(z):
                z = np.asarray(z, dtype=complex)
                t = tring0_values(z, p)
                return 1.0 - 1j * t * (bubble_values(z, Sector.SYMMETRIC, p) - bubble_values(z, Sector.NONSYMMETRIC, p))

            D = np.abs(den(-W))
            pad = np.pad(D, 1, constant_values=np.inf)
            is_min = np.ones_like(D, dtype=bool)
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    if di or dj:
                        is_min &= D <= pad[1 + di:1 + di + D.shape[0], 1 + dj:1 + dj + D.shape[1]]
            for i, j in zip(*np.nonzero(is_min & (D < 0.5))):
                z0 = -W[i, j]
                z, fz = _secant(lambda z: complex(den(z)), z0, z0 + 1e-3)
                w = -z
                if fz < 1e-8 and inside(w):
                    sing.append({"kind": "hopping_denominator_zero", "omega": [float(w.real), float(w.imag)]})

        vals_lower = np.abs(psi_values(W, solution, p))
        vals_real = np.abs(psi_values(re.astype(complex), solution, p))
        max_lower = float(np.max(vals_lower))
        max_real = float(np.max(vals_real))
        if not (np.isfinite(max_lower) and np.isfinite(max_real)):
            sing.append({"kind": "non_finite", "omega": None})
    except Exception as exc:  # the diagnostic reports, it does not throw
        sing.append({"kind": "error", "detail": f"{type(exc).__name__}: {exc}"})
        max_lower = max_real = float("nan")
    sing = _dedupe(sing)
    return PoleCheckReport(not sing, sing, max_lower, max_real, (float(re.min()), float(re.max())), (float(im_min), 0.0))


def _dedupe(items: list) -> list:
    out, seen = [], set()
    for s in items:
        w = s.get("omega")
        key = (s["kind"], None if w is None else (round(w[0], 6), round(w[1], 6)))
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out


# -- amplitude and maps -------------------------------------------------------


def _amplitude_values(w1, w2, p, solution) -> np.ndarray:
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    w3 = -w1 - w2
    g0 = complex(sym_elements(0.0, p)["ac0"])
    pre = (p.alpha * SQRT_2PI * g0) ** 3
    # one component suffices: all three are equal in the position-summed model
    s1 = psi_values(w1, solution, p)[..., 0]
    s2 = psi_values(w2, solution, p)[..., 0]
    s3 = psi_values(w3, solution, p)[..., 0]
    g1 = sym_elements(w1, p)["ac0"]
    g2 = sym_elements(w2, p)["ac0"]
    g3 = sym_elements(w3, p)["ac0"]
    return pre * (s3 + (s1 + s2)) * (_commuting_product(g1, g2) * g3)


def _commuting_product(x, y):
    # complex multiply from separate real operations: fused multiply-add in
    # the vectorized complex loop can make x * y and y * x differ in the last bit
    x, y = np.asarray(x), np.asarray(y)
    re = x.real * y.real - x.imag * y.imag
    im = x.real * y.imag + x.imag * y.real
    return re + 1j * im


def three_photon_amplitude(omega1: float, omega2: float, params: ModelParams, solution: FaddeevSolution | None = None) -> ThreePhotonAmplitude:
    """Coefficient of delta(w1 + w2 + w3) with w3 = -w1 - w2."""
    p = ensure_valid(params)
    sol = solution or solve_pole_values(p)
    # length-1 arrays take the same numpy code path as the map, so both agree bitwise
    value = _amplitude_values(np.array([omega1], dtype=float), np.array([omega2], dtype=float), p, sol)[0]
    return ThreePhotonAmplitude(float(omega1), float(omega2), complex(value))


def three_photon_map(grid1, grid2, params: ModelParams, solution: FaddeevSolution | None = None, overlay: bool = False, threads: int = 1) -> SpectralGrid:
    """Amplitude over the (w1, w2) grid; the pole values are solved once."""
    p = ensure_valid(params)
    sol = solution or solve_pole_values(p)
    g1 = np.asarray(grid1, dtype=float)
    g2 = np.asarray(grid2, dtype=float)
    # elementwise evaluation, so splitting rows across threads is exact
    rows = map_ordered(lambda w1: _amplitude_values(np.full(g2.size, w1), g2, p, sol), list(g1), threads)
    values = np.array(rows, dtype=complex).reshape(g1.size, g2.size)
    meta = {
        "observable": "three_photon_amplitude",
        "shell_constraint": "omega1 + omega2 + omega3 = 0",
        "params_hash": p.digest(),
        "units": "gamma_e",
        "faddeev_condition": sol.condition,
        "faddeev_residual": sol.system_residual,
    }
    if overlay:
        meta["eps"] = list(polariton_eigenvalues(p).eps)
    return SpectralGrid(("omega1", "omega2"), (g1, g2), values, Shell.PLANE, meta)


# -- ridge geometry -----------------------------------------------------------


def _line_peaks(row: np.ndarray, rel_prominence: float) -> np.ndarray:
    top = np.max(row)
    if not top > 0:
        return np.array([], dtype=int)
    idx, _ = find_peaks(row, prominence=rel_prominence * top)
    return idx


def ridge_report(grid: SpectralGrid, eps, tol: float = 0.5, rel_prominence: float = 1e-3, min_fraction: float = 0.1) -> dict:
    """Compare scan-line maxima of |amplitude| with the +/-eps_k ridge families.

    Rows (fixed w2) may peak at w1 = +/-eps_k (vertical ridges) or where the
    antidiagonal w1 + w2 = +/-eps_k crosses; columns likewise.  Returns the
    worst distance, the offending peaks and the distinct vertical ridge
    positions that persist over at least ``min_fraction`` of the rows.
    """
    a1, a2 = grid.axes
    mag = np.abs(grid.values)
    e = np.concatenate([np.asarray(eps, dtype=float), -np.asarray(eps, dtype=float)])
    worst, bad, peaks_w1 = 0.0, [], []
    for j, w2 in enumerate(a2):
        for i in _line_peaks(mag[:, j], rel_prominence):
            cand = np.concatenate([e, e - w2])
            d = float(np.min(np.abs(cand - a1[i])))
            worst = max(worst, d)
            peaks_w1.append(a1[i])
            if d > tol:
                bad.append(("row", float(a1[i]), float(w2), d))
    for i, w1 in enumerate(a1):
        for j in _line_peaks(mag[i, :], rel_prominence):
            cand = np.concatenate([e, e - w1])
            d = float(np.min(np.abs(cand - a2[j])))
            worst = max(worst, d)
            if d > tol:
                bad.append(("column", float(w1), float(a2[j]), d))
    vertical = _persistent_positions(a1, peaks_w1, a2.size, min_fraction)
    return {"worst_distance": worst, "violations": bad, "vertical_ridges": vertical, "tolerance": tol}


def _persistent_positions(axis: np.ndarray, positions: list, n_lines: int, min_fraction: float = 0.25) -> list:
    """Axis values hit by a peak on at least ``min_fraction`` of the scan lines.

    A line counts for bin k if it has a peak within one bin of k; the
    returned positions are local maxima of that count, at least three bins
    apart.
    """
    if not positions:
        return []
    bins = np.searchsorted(axis, positions)
    bins = np.clip(bins, 0, axis.size - 1)
    hits = np.bincount(bins, minlength=axis.size).astype(float)
    count = hits + np.concatenate([[0], hits[:-1]]) + np.concatenate([hits[1:], [0]])
    order = np.argsort(-count, kind="stable")
    chosen: list[int] = []
    for k in order:
        if count[k] < min_fraction * n_lines:
            break
        if all(abs(k - c) > 3 for c in chosen):
            chosen.append(int(k))
    return sorted(float(axis[k]) for k in chosen)
