"""Acceptance suite: one test per numbered criterion.

Each test prints a single PASS/FAIL line with the measured metric and the
pinned tolerance, then asserts.  The lines are collected into an
"acceptance criteria" section of the terminal summary.
"""

import time

from rydcav import validation
from rydcav.cli import main


def _run(check, time_limit):
    start = time.perf_counter()
    result = check()
    elapsed = time.perf_counter() - start
    ok = result.passed and elapsed < time_limit
    status = "PASS" if ok else "FAIL"
    print(f"\n{status} criterion {result.criterion:2d} {result.name}: metric={result.metric:.3e} tol={result.tolerance:.3e} runtime={elapsed:.2f}s limit={time_limit:g}s")
    return result, elapsed


def _assert(result, elapsed, time_limit):
    assert elapsed < time_limit, f"runtime {elapsed:.2f}s exceeds {time_limit}s"
    assert result.passed, result.to_dict()


def test_criterion_01_green_defining_residual():
    res, t = _run(validation.check_green_residual, 1.0)
    assert res.details["draws"] == 1000
    assert res.metric < 1e-12
    _assert(res, t, 1.0)


def test_criterion_02_linear_eit_identity():
    res, t = _run(validation.check_linear_identity, 60.0)
    assert res.details["route_rel_err"] < 1e-12
    assert res.details["perfect_eit_rel_err"] < 1e-12
    _assert(res, t, 60.0)


def test_criterion_03_bubble_oracle():
    res, t = _run(validation.check_bubble_oracle, 30.0)
    assert res.details["draws"] == 50
    assert res.metric < 1e-8
    _assert(res, t, 30.0)


def test_criterion_04_tmatrix_oracles():
    res, t = _run(validation.check_tmatrix_oracles, 120.0)
    assert res.details["g0_exact"] is True
    assert res.details["lattice_rel_err"] < 0.05
    assert res.details["ladder_rel_err"] < 1e-3
    _assert(res, t, 120.0)


def test_criterion_05_alpha_scaling():
    res, t = _run(validation.check_alpha_scaling, 60.0)
    for key in ("pair", "elastic", "inelastic", "factorization"):
        assert res.details[key] < 1e-12, key
    _assert(res, t, 60.0)


def test_criterion_06_elastic_two_path():
    res, t = _run(validation.check_elastic_two_path, 60.0)
    assert res.metric < 1e-12
    _assert(res, t, 60.0)


def test_criterion_07_inelastic_spectrum_geometry():
    res, t = _run(validation.check_spectrum_geometry, 60.0)
    for case in res.details["cases"]:
        print(
            f"  delta_c={case['delta_c']:+.1f}: worst peak offset {case['worst_distance']:.3f}"
            f" ({case['worst_distance_steps']:.2f} grid steps), min density {case['min_density']:.3e}"
        )
    assert res.details["nonnegative"]
    _assert(res, t, 60.0)


def test_criterion_08_faddeev_oracle():
    res, t = _run(validation.check_faddeev_oracle, 60.0)
    assert res.details["kernel_gain"] < 0.5
    assert res.details["fixed_point_residual"] < 1e-10
    assert res.metric < 1e-6
    _assert(res, t, 60.0)


def test_criterion_09_pole_assumption():
    res, t = _run(validation.check_pole_assumption, 120.0)
    assert len(res.details["sets"]) == 4
    _assert(res, t, 120.0)


def test_criterion_10_three_photon_geometry():
    res, t = _run(validation.check_three_photon_geometry, 300.0)
    assert res.metric <= 0.5
    assert res.details["max_symmetry_rel_err"] < 1e-12
    assert res.details["resonant_vertical_ridges"] >= 3
    _assert(res, t, 300.0)


def test_criterion_11_validate_is_deterministic(tmp_path, capsys):
    reports = []
    for name in ("first", "second"):
        out = tmp_path / name
        code = main(["validate", "--out", str(out)])
        assert code in (0, 4)
        reports.append((out / "validate.json").read_bytes())
    capsys.readouterr()
    same = reports[0] == reports[1]
    print(f"\n{'PASS' if same else 'FAIL'} criterion 11 validate_determinism: identical={same} bytes={len(reports[0])}")
    assert same

