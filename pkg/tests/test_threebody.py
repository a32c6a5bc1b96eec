import json

import numpy as np
import pytest

from rydcav.errors import SingularFaddeevSystem
from rydcav.greens import atomic_poles, cc_element
from rydcav.grid import Shell, SpectralGrid
from rydcav.model import LatticeSpec, ModelParams, updated, validate
from rydcav.threebody import (
    bmatrix,
    eta,
    fixed_point_residual,
    kernel_gain,
    psi,
    psi2,
    psi2_lattice_bruteforce,
    ridge_report,
    solve_pole_values,
    three_photon_amplitude,
    three_photon_map,
    verify_pole_assumption,
)
from rydcav.twobody import Sector, bubble_values, tring0, tring0_values, tring_lattice_oracle


@pytest.fixture(scope="module")
def solved():
    p = validate(ModelParams())
    return p, solve_pole_values(p)


def test_bmatrix_structure(params):
    b = bmatrix(0.7, params).matrix
    t = tring0(0.7, params)
    assert np.all(np.diag(b) == 0)
    off = b[~np.eye(3, dtype=bool)]
    assert np.all(off == t)
    assert np.allclose(b.sum(axis=1), 2 * t, rtol=1e-15)
    assert np.allclose(b @ np.ones(3), 2 * t * np.ones(3), rtol=1e-15)
    assert np.all(bmatrix(0.7, updated(params, c6=0.0)).matrix == 0)


def test_psi2_structure(params):
    for w in (-1.0, 0.0, 2.5):
        v = psi2(w, params)
        assert v[0] == v[1] == v[2]
    assert np.all(psi2(0.3, updated(params, c6=0.0)) == 0)


@pytest.fixture(scope="module")
def bruteforce_case():
    p = updated(ModelParams(), g_sqrt_n=0.0, c6=-20.0)
    return p, LatticeSpec.for_volume(p.volume, (14, 14, 14))


def test_psi2_equals_explicit_position_sum(bruteforce_case):
    # same lattice pair T-matrix on both sides: the position sum must be exact
    p, lattice = bruteforce_case

    def lattice_tring(z):
        z = np.asarray(z)
        flat = [tring_lattice_oracle(float(np.real(x)), p, lattice) for x in z.ravel()]
        return np.asarray(flat, dtype=complex).reshape(z.shape)

    for w in (0.0, 0.5):
        brute = psi2_lattice_bruteforce(w, p, lattice)
        seam = psi2(w, p, tring_fn=lattice_tring)
        assert np.allclose(brute, seam, rtol=1e-12, atol=0)


def test_psi2_continuum_vs_lattice(bruteforce_case):
    p, lattice = bruteforce_case
    for w in (0.0, 0.5, -0.5):
        brute = psi2_lattice_bruteforce(w, p, lattice)[0]
        assert abs(psi2(w, p)[0] - brute) / abs(brute) < 0.05


def test_eta_without_control_field():
    p = validate(ModelParams(omega_cf=0.0, delta_c=0.0, delta_e=0.0, delta_r=0.0))
    ap = atomic_poles(p)
    j = 1 + int(np.argmin(np.abs(np.array(ap.poles) + 1j * p.gamma_r)))
    for w in (-1.0, 0.0, 2.0):
        assert eta(j, w, p) == pytest.approx(complex(cc_element(w + 1j * p.gamma_r, p)), rel=1e-14)
        assert eta(3 - j, w, p) == pytest.approx(0.0, abs=1e-14)


def test_eta_closure_reproduces_bubble(params):
    for w in (0.0, 1.3, -0.4):
        closure = -1j * (eta(1, w, params) + eta(2, w, params))
        assert closure == pytest.approx(complex(bubble_values(w, Sector.NONSYMMETRIC, params)), rel=1e-13)


def test_eta_is_alpha_independent(params):
    q = updated(params, alpha=3.0)
    assert eta(1, 0.2, q) == eta(1, 0.2, params)
    with pytest.raises(ValueError):
        eta(3, 0.0, params)


def test_solution_properties(solved):
    p, sol = solved
    assert sol.pole_values.shape == (2, 3)
    assert np.allclose(sol.pole_values, sol.pole_values[:, :1], rtol=1e-14, atol=0)
    assert sol.system_residual < 1e-10
    assert fixed_point_residual(sol, p) < 1e-10
    for j, w in enumerate(sol.poles):
        assert np.allclose(psi(w, sol, p), sol.pole_values[j], rtol=1e-10, atol=0)


def test_non_interacting_solution_vanishes(params):
    p = updated(params, c6=0.0)
    sol = solve_pole_values(p)
    assert np.all(sol.pole_values == 0)
    assert np.all(psi(np.linspace(-3, 3, 5), sol, p) == 0)
    assert three_photon_amplitude(0.3, -1.1, p, sol).value == 0
    assert verify_pole_assumption(sol, p).passed


def test_weak_coupling_correction_is_higher_order(params):
    def rel_correction(c6):
        p = updated(params, c6=c6)
        sol = solve_pole_values(p)
        second = np.array([psi2(w, p) for w in sol.poles])
        return np.max(np.abs(sol.pole_values - second)) / np.max(np.abs(second))

    # the B-matrix correction is relative O(T), and T scales with sqrt|C6|
    assert rel_correction(-2.5e-3) / rel_correction(-1e-2) == pytest.approx(0.5, rel=0.01)


def test_singular_system_is_reported(params):
    from rydcav.threebody import _eta_values

    poles = atomic_poles(params).poles
    E = np.array([[_eta_values(-wa, params)[b] for b in range(2)] for wa in poles])
    t = 1 / (2 * np.linalg.eigvals(E)[0])
    with pytest.raises(SingularFaddeevSystem):
        solve_pole_values(params, tring_fn=lambda z: np.full(np.shape(z), t, dtype=complex))


def test_amplitude_symmetries(solved):
    p, sol = solved
    rng = np.random.default_rng(7)
    for w1, w2 in rng.uniform(-6, 6, size=(20, 2)):
        a = three_photon_amplitude(w1, w2, p, sol)
        assert a.value == three_photon_amplitude(w2, w1, p, sol).value
        w3 = a.omega3
        for x, y in ((w1, w3), (w3, w2), (w2, w3)):
            other = three_photon_amplitude(x, y, p, sol).value
            assert abs(other - a.value) <= 1e-12 * abs(a.value)


def test_amplitude_alpha_cubed(solved):
    p, sol = solved
    q = updated(p, alpha=2.0)
    a = three_photon_amplitude(0.4, -1.0, p, sol).value
    b = three_photon_amplitude(0.4, -1.0, q, solve_pole_values(q)).value
    assert b == pytest.approx(8 * a, rel=1e-13)


def test_amplitude_linear_in_source(solved):
    p, sol = solved
    doubled = solve_pole_values(p, psi2_fn=lambda z: 2 * psi2(z, p))
    for w1, w2 in ((0.0, 0.0), (1.5, -2.0)):
        a = three_photon_amplitude(w1, w2, p, sol).value
        b = three_photon_amplitude(w1, w2, p, doubled).value
        assert b == pytest.approx(2 * a, rel=1e-13)


def test_map_matches_pointwise(solved):
    p, sol = solved
    one = three_photon_map([0.3], [-0.8], p, sol)
    assert one.shell is Shell.PLANE
    assert one.values[0, 0] == three_photon_amplitude(0.3, -0.8, p, sol).value
    g = np.linspace(-3, 3, 13)
    a = three_photon_map(g, g, p, sol, overlay=True)
    b = three_photon_map(g, g, p, sol, overlay=True, threads=4)
    assert np.array_equal(a.values, b.values)
    assert len(a.metadata["eps"]) == 3
    json.dumps(a.metadata)


def test_pole_check_passes_on_defaults(solved):
    p, sol = solved
    rep = verify_pole_assumption(sol, p)
    assert rep.passed and rep.singularities == []
    assert np.isfinite(rep.growth)
    json.dumps(rep.to_dict())


def test_pole_check_localizes_hopping_zero():
    p = updated(ModelParams(), c6=-1e3, volume=10.0)
    rep = verify_pole_assumption(solve_pole_values(p), p)
    assert not rep.passed
    zeros = [s["omega"] for s in rep.singularities if s["kind"] == "hopping_denominator_zero"]
    assert zeros
    for re, im in zeros:
        assert im < 0
        z = np.array(-(re + 1j * im))
        den = 1 - 1j * tring0_values(z, p) * (bubble_values(z, "symmetric", p) - bubble_values(z, "nonsymmetric", p))
        assert abs(den) < 1e-8


def test_pole_check_never_raises(solved):
    p, sol = solved
    broken = type(sol)(sol.poles, sol.residues, sol.pole_values, None, sol.tring_fn)
    rep = verify_pole_assumption(broken, p)
    assert not rep.passed
    assert rep.singularities[-1]["kind"] == "error"


def test_kernel_gain_small_for_oracle_volume():
    assert kernel_gain(updated(ModelParams(), volume=100.0)) < 0.5


def test_ridge_report_on_synthetic_map():
    ax = np.linspace(-6, 6, 121)
    w1, w2 = np.meshgrid(ax, ax, indexing="ij")

    def lor(x):
        return 1 / (1 + (x / 0.1) ** 2)

    eps = (-2.0, 0.0, 2.0)
    vals = sum(lor(w1 - e) + lor(w2 - e) + lor(w1 + w2 + e) for e in eps)
    grid = SpectralGrid(("omega1", "omega2"), (ax, ax), vals.astype(complex), Shell.PLANE)
    rep = ridge_report(grid, eps)
    assert rep["worst_distance"] < 0.11
    assert rep["violations"] == []
    assert rep["vertical_ridges"] == pytest.approx(list(eps), abs=0.11)
    shifted = ridge_report(grid, (-1.0, 0.9, 3.0))
    assert shifted["violations"]
