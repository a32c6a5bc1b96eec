import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rydcav.errors import ResonantDenominator, WrongSignC6, ZeroBubble
from rydcav.model import LatticeSpec, ModelParams, updated, validate
from rydcav.twobody import (
    Sector,
    bubble,
    bubble_quadrature_oracle,
    bubble_values,
    ladder_closed_form_t0,
    ladder_series_t0,
    pair_amplitude,
    pair_first_order,
    sector_poles,
    t0,
    t0_from,
    tmatrix_scalar,
    tring0,
    tring0_radial_quadrature,
    tring_from_bubble,
    tring_lattice_oracle,
    u_fourier,
    u_fourier_grid,
)

from strategies import model_params

RESONANT = dict(delta_c=0.0, delta_e=0.0, delta_r=0.0)


def test_single_pole_bubble_by_hand():
    # (1/2pi) int dw 1/((w + i g)(-w + i g)) = (1/2pi) int dw -1/(w^2 + g^2) = -1/(2g)
    p = validate(ModelParams(omega_cf=0.0, **RESONANT))
    expected = -1.0 / (2 * p.gamma_r)
    assert bubble(0.0, Sector.NONSYMMETRIC, p).value == pytest.approx(expected, rel=1e-14)
    assert bubble_quadrature_oracle(0.0, Sector.NONSYMMETRIC, p) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("w", [-3.0, 0.0, 1.2])
def test_sectors_coincide_without_coupling(params, w):
    p = updated(params, g_sqrt_n=0.0)
    a = complex(bubble_values(w, Sector.SYMMETRIC, p))
    b = complex(bubble_values(w, Sector.NONSYMMETRIC, p))
    assert a == pytest.approx(b, rel=1e-12)


@given(model_params, st.sampled_from(list(Sector)), st.sampled_from([0.0, 1.0, -5.0]))
def test_residue_bubble_matches_quadrature(p, sector, w):
    a = complex(bubble_values(w, sector, p))
    b = bubble_quadrature_oracle(w, sector, p)
    assert abs(a - b) < 1e-8 * abs(b)


def test_symmetric_residues_sum_to_one(params):
    poles, res = sector_poles("symmetric", params)
    assert len(poles) == 3
    assert np.all(poles.imag < 0)
    assert res.sum() == pytest.approx(1.0, rel=1e-12)


def test_bubble_vectorizes(params):
    z = np.array([0.0, 1.0 - 0.5j, -2.0])
    vec = bubble_values(z, "nonsymmetric", params)
    assert vec.shape == (3,)
    assert vec[1] == complex(bubble_values(z[1], "nonsymmetric", params))


def test_tring_volume_scaling(params):
    big = updated(params, volume=2 * params.volume)
    assert tring0(0.0, big) == pytest.approx(tring0(0.0, params) / 2, rel=1e-14)


def test_tring_rejects_repulsive_and_zero_bubble(params):
    with pytest.raises(WrongSignC6):
        tring0(0.0, updated(params, c6=1.0))
    with pytest.raises(ZeroBubble):
        tring_from_bubble(0.0, params)


def test_tring_non_interacting_limit(params):
    p = updated(params, c6=0.0)
    assert tring0(0.3, p) == 0
    assert t0(p) == 0


def test_tring_vs_lattice_and_radial_quadrature(params):
    lattice = LatticeSpec.for_volume(params.volume, (40, 40, 40))
    closed = tring0(0.0, params)
    lat = tring_lattice_oracle(0.0, params, lattice)
    assert abs(lat - closed) / abs(closed) < 0.05
    # the branch of the square root is fixed by the direct sum
    assert np.sign(lat.imag) == np.sign(closed.imag)
    assert np.sign(lat.real) == np.sign(closed.real)
    radial = tring0_radial_quadrature(0.0, params)
    assert abs(radial - closed) / abs(closed) < 0.05


def test_lattice_oracle_converges_with_refinement(params):
    coarse = tring_lattice_oracle(0.0, params, LatticeSpec.for_volume(params.volume, (40,) * 3))
    fine = tring_lattice_oracle(0.0, params, LatticeSpec.for_volume(params.volume, (80,) * 3))
    assert abs(fine - coarse) / abs(fine) < 0.01


def test_lattice_oracle_limits(params):
    lattice = LatticeSpec.for_volume(params.volume, (10,) * 3)
    weak = updated(params, c6=-1e-9)
    mean_kappa = lattice.kappa(weak.c6).mean()
    assert tring_lattice_oracle(0.0, weak, lattice) == pytest.approx(mean_kappa, rel=1e-6)
    strong = updated(params, c6=-1e14)
    S = complex(bubble_values(0.0, "nonsymmetric", strong))
    saturated = 1j / S * (lattice.n_sites - 1) / lattice.n_sites
    assert tring_lattice_oracle(0.0, strong, lattice) == pytest.approx(saturated, rel=1e-4)


def test_t0_equals_tring_without_coupling(params):
    p = updated(params, g_sqrt_n=0.0)
    assert t0(p) == tring0(0.0, p)
    s = tmatrix_scalar(p)
    assert s.t0 == s.tring0


def test_t0_weak_interaction_sqrt_scaling(params):
    a = t0(updated(params, c6=-1e-8))
    b = t0(updated(params, c6=-4e-8))
    assert b / a == pytest.approx(2.0, rel=1e-4)


def test_t0_resonant_denominator():
    ds = 0.5 + 0.25j
    with pytest.raises(ResonantDenominator):
        t0_from(-1j / ds, ds, 0.0)


def test_ladder_series_matches_closed_form():
    p = updated(ModelParams(), volume=216.0, c6=-0.2)
    lattice = LatticeSpec.for_volume(p.volume, (6, 6, 6))
    series, n = ladder_series_t0(p, lattice)
    assert n > 3
    closed = ladder_closed_form_t0(p, lattice)
    assert abs(series - closed) / abs(closed) < 1e-3


def test_u_fourier_properties(params):
    lattice = LatticeSpec.for_volume(64.0, (4, 4, 4))
    p = updated(params, volume=64.0)
    kappa = lattice.kappa(p.c6)
    assert u_fourier(np.zeros(3), lattice, p) == pytest.approx(kappa.mean(), rel=1e-14)
    K = 2 * np.pi / (4 * lattice.step) * np.array([1.0, 2.0, 3.0])
    assert u_fourier(-K, lattice, p) == pytest.approx(np.conj(u_fourier(K, lattice, p)), rel=1e-12)
    grid = u_fourier_grid(lattice, p)
    assert grid[1, 2, 3] == pytest.approx(u_fourier(K, lattice, p), rel=1e-12, abs=1e-15)
    # Parseval: sum_K |U_K|^2 = (1/N) sum_r kappa^2
    assert np.sum(np.abs(grid) ** 2) == pytest.approx(np.sum(kappa ** 2) / lattice.n_sites, rel=1e-12)


def test_pair_amplitude_properties(params):
    off = updated(params, c6=0.0)
    assert pair_amplitude(0.7, off).value == 0
    for w in (0.3, 1.7, 4.0):
        assert pair_amplitude(w, params).value == pair_amplitude(-w, params).value
    u0 = -0.0123 + 0.004j
    for w in (0.0, 0.9):
        direct = pair_amplitude(w, params, t_matrix=u0).value
        assert direct == pytest.approx(pair_first_order(w, params, u0), rel=1e-13)


def test_pair_alpha_scaling(params):
    one = pair_amplitude(0.5, params).value
    two = pair_amplitude(0.5, updated(params, alpha=2 * params.alpha)).value
    assert two == pytest.approx(4 * one, rel=1e-14)
