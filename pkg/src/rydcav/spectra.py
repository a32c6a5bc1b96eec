"""Mean field, elastic weight and inelastic density of the transmitted light."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import SQRT_2PI
from .errors import NonPhysicalDensity
from .greens import polariton_sweep, sym_elements
from .grid import Shell, SpectralGrid, map_ordered
from .model import ModelParams, ensure_valid, updated
from .twobody import t0

IMAG_TOL = 1e-8
NEG_TOL = 1e-12


@dataclass(frozen=True)
class LinearResponse:
    a1: complex
    a3: complex


def a_mean_first(params: ModelParams) -> complex:
    """<a>^(1) = (-i alpha) i G_aa[0]."""
    p = ensure_valid(params)
    return complex((-1j * p.alpha) * 1j * sym_elements(0.0, p)["aa"])


def a_mean_first_closed_form(params: ModelParams) -> complex:
    """Cavity-EIT response -i alpha / (Gc + g^2 N / (Ge + Omega^2 / (4 Gr))).

    The nested fraction is cleared of 1/Gr so that Gr = 0 is allowed.
    """
    p = ensure_valid(params)
    g2, om2 = p.g_sqrt_n ** 2, p.omega_cf ** 2
    return complex(-1j * p.alpha / (p.Gc + g2 * 4 * p.Gr / (4 * p.Ge * p.Gr + om2)))


def _legs_at_zero(p):
    g = complex(sym_elements(0.0, p)["ac0"])
    return g, -np.conj(g)  # time-ordered and anti-time-ordered


def a_mean_third(params: ModelParams, t_matrix: complex | None = None) -> complex:
    """delta(w) coefficient of <a(w)>^(3)."""
    p = ensure_valid(params)
    T = t0(p) if t_matrix is None else t_matrix
    g, g_anti = _legs_at_zero(p)
    feed = (-1j * SQRT_2PI * p.alpha) ** 3
    return complex(feed * (-1j * g * 1j * g_anti) * (-1j * T / (2 * np.pi)) * (1j * g) ** 2)


def linear_response(params: ModelParams) -> LinearResponse:
    return LinearResponse(a_mean_first(params), a_mean_third(params))


def elastic_weight(params: ModelParams, t_matrix: complex | None = None) -> float:
    """delta(w) delta(w') coefficient of the fourth-order G1, c.c. included."""
    p = ensure_valid(params)
    T = t0(p) if t_matrix is None else t_matrix
    g, g_anti = _legs_at_zero(p)
    g_aa = complex(sym_elements(0.0, p)["aa"])
    z = -2 * np.pi * p.alpha ** 4 * np.conj(g_aa) * (g * g_anti) * T * g ** 2
    return float((z + np.conj(z)).real)


def elastic_weight_factorized(params: ModelParams, t_matrix: complex | None = None) -> float:
    """Same weight assembled as <a+>^(3)<a>^(1) + <a+>^(1)<a>^(3)."""
    a1 = SQRT_2PI * a_mean_first(params)
    a3 = a_mean_third(params, t_matrix)
    return float((np.conj(a3) * a1 + np.conj(a1) * a3).real)


def second_order_g1(params: ModelParams) -> complex:
    """Second-order G1 coefficient; equal to |<a>^(1)|^2 by factorization."""
    a1 = a_mean_first(params)
    return complex(np.conj(a1) * a1)


def inelastic_coefficient(omega, params: ModelParams, t_matrix: complex | None = None) -> np.ndarray:
    """Complex delta(w - w') coefficient assembled factor by factor (vectorized)."""
    p = ensure_valid(params)
    T = t0(p) if t_matrix is None else t_matrix
    w = np.asarray(omega, dtype=float)
    g_out = sym_elements(w, p)["ac0"]
    g_anti_out = -np.conj(g_out)
    greater = 2j * np.imag(sym_elements(-w, p)["c0c0"])
    g_in, g_anti_in = _legs_at_zero(p)
    return (
        -p.alpha ** 4 * abs(T) ** 2 * 1j * greater * g_anti_out * g_out * g_in ** 2 * g_anti_in ** 2
    )


def inelastic_density(omega, params: ModelParams, t_matrix: complex | None = None):
    """S_out(w) = 2 gamma_c_d x coefficient; real, nonnegative.

    Raises NonPhysicalDensity if the assembled product is not real and
    nonnegative to tolerance.  Scalars in, float out; arrays in, arrays out.
    """
    p = ensure_valid(params)
    c = 2 * p.gamma_c_d * inelastic_coefficient(omega, p, t_matrix)
    scale = np.abs(c)
    bad_im = np.abs(c.imag) > IMAG_TOL * np.maximum(scale, 1e-300)
    if np.any(bad_im & (scale > 0)):
        raise NonPhysicalDensity("inelastic coefficient has a non-negligible imaginary part")
    if np.any(c.real < -NEG_TOL):
        raise NonPhysicalDensity(f"negative inelastic density {float(np.min(c.real)):.3e}")
    out = c.real
    return float(out) if np.ndim(out) == 0 else out


def spectrum_sweep(omega_grid, omegacf_grid, params: ModelParams, overlay: bool = True, threads: int = 1) -> SpectralGrid:
    """Inelastic density over (Omega_cf, w) with log10 and +/-eps_k columns.

    Rows are independent; ``threads`` > 1 evaluates them concurrently with
    identical results.
    """
    p = ensure_valid(params)
    omega_grid = np.asarray(omega_grid, dtype=float)
    omegacf_grid = np.asarray(omegacf_grid, dtype=float)

    def row(om):
        return inelastic_density(omega_grid, updated(p, omega_cf=float(om)))

    rows = map_ordered(row, list(omegacf_grid), threads)
    values = np.array(rows, dtype=float).reshape(omegacf_grid.size, omega_grid.size)
    with np.errstate(divide="ignore"):
        log_values = np.where(values > 0, np.log10(np.where(values > 0, values, 1.0)), np.nan)
    columns = {"log10_density": log_values}
    if overlay:
        eps = polariton_sweep(omegacf_grid, p)
        for k in range(3):
            columns[f"eps{k + 1}"] = eps[:, k][:, None]
    return SpectralGrid(
        ("omega_cf", "omega"),
        (omegacf_grid, omega_grid),
        values,
        Shell.LINE,
        {"observable": "inelastic_density", "shell_constraint": "omega = omega'", "params_hash": p.digest(), "units": "gamma_e"},
        columns,
    )


def slice_peaks(values: np.ndarray, rel_floor: float = 0.0) -> list[np.ndarray]:
    """Indices of interior strict local maxima, row by row.

    Rows that vanish identically have no peaks.  Maxima below
    ``rel_floor`` times the row maximum are dropped.
    """
    out = []
    for row in np.atleast_2d(values):
        top = np.max(row)
        if not top > 0:
            out.append(np.array([], dtype=int))
            continue
        mid = row[1:-1]
        idx = np.nonzero((mid > row[:-2]) & (mid > row[2:]) & (mid >= rel_floor * top))[0] + 1
        out.append(idx)
    return out


def peak_misfit(grid: SpectralGrid, targets) -> np.ndarray:
    """For each detected peak, the distance to the nearest target frequency.

    ``targets`` has one row of candidate frequencies per Omega_cf slice.
    Returns an array of (omega_cf, peak_omega, distance) triples.
    """
    omegas = grid.axes[1]
    rows = []
    for i, idx in enumerate(slice_peaks(grid.values)):
        t = np.asarray(targets[i], dtype=float)
        for j in idx:
            rows.append((grid.axes[0][i], omegas[j], float(np.min(np.abs(t - omegas[j])))))
    return np.array(rows).reshape(-1, 3)
