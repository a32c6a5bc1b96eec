import math

import pytest
from hypothesis import given

from rydcav.errors import InconsistentVolume, NegativeDecay, NonPositiveRate, ParameterError
from rydcav.model import LatticeSpec, ModelParams, coupling_from_cooperativity, updated, validate

from strategies import model_params


def test_defaults_validate_with_summed_cavity_loss():
    p = validate(ModelParams())
    assert p.gamma_c == pytest.approx(p.gamma_c_f + 0.3)
    assert validate(ModelParams(gamma_c_f=0.01, gamma_c_d=0.3)).gamma_c == pytest.approx(0.31)


def test_complex_rates():
    p = validate(ModelParams(delta_c=1.5, delta_e=-2.0, delta_r=0.5))
    assert p.Gc == complex(p.gamma_c, 1.5)
    assert p.Ge == complex(1.0, -2.0)
    assert p.complex_rate("r") == p.Gr == complex(p.gamma_r, 0.5)
    assert p.half_omega == 0.5 * p.omega_cf


@pytest.mark.parametrize(
    "change, exc",
    [
        ({"gamma_e": 0.0}, NonPositiveRate),
        ({"gamma_e": -1.0}, NonPositiveRate),
        ({"gamma_r": -0.1}, NegativeDecay),
        ({"alpha": -1.0}, NegativeDecay),
        ({"gamma_c_f": 0.0, "gamma_c_d": 0.0}, NonPositiveRate),
        ({"volume": 0.0}, ParameterError),
        ({"delta_c": math.nan}, ParameterError),
        ({"c6": math.inf}, ParameterError),
    ],
)
def test_invalid_parameters_rejected(change, exc):
    with pytest.raises(exc):
        updated(ModelParams(), **change)


def test_lattice_volume_mismatch():
    lat = LatticeSpec.for_volume(1000.0, (10, 10, 10))
    assert validate(ModelParams(volume=1000.0), lat).volume == 1000.0
    validate(ModelParams(volume=1005.0), lat)  # 0.5% is tolerated
    with pytest.raises(InconsistentVolume):
        validate(ModelParams(volume=1100.0), lat)


def test_lattice_spec():
    lat = LatticeSpec.for_volume(216.0, (6, 6, 6))
    assert lat.step == pytest.approx(1.0)
    assert lat.n_sites == 216
    kappa = lat.kappa(-2.0)
    assert kappa[0, 0, 0] == 0.0
    assert kappa[1, 0, 0] == pytest.approx(-2.0)
    assert kappa[5, 0, 0] == kappa[1, 0, 0]  # minimum image
    with pytest.raises(ParameterError):
        LatticeSpec(step=0.0, dims=(2, 2, 2))
    with pytest.raises(ParameterError):
        LatticeSpec(step=1.0, dims=(1, 1, 1))


@pytest.mark.parametrize(
    "coop, gc, ge, expected",
    [(0.0, 0.3, 1.0, 0.0), (5.0, 0.3, 1.0, math.sqrt(1.5)), (1.0, 1.0, 1.0, 1.0)],
)
def test_coupling_from_cooperativity(coop, gc, ge, expected):
    assert coupling_from_cooperativity(coop, gc, ge) == pytest.approx(expected, rel=1e-15)


def test_coupling_rejects_negative():
    with pytest.raises(ParameterError):
        coupling_from_cooperativity(-1.0, 0.3, 1.0)


def test_from_cooperativity_uses_total_cavity_loss():
    p = ModelParams.from_cooperativity(5.0, gamma_c_d=0.3, gamma_c_f=0.0)
    assert p.g_sqrt_n == pytest.approx(math.sqrt(1.5))


@given(model_params)
def test_serialization_round_trip(p):
    assert ModelParams.from_json(p.to_json()) == p
    assert ModelParams.from_dict(p.to_dict()) == p
    assert ModelParams.from_json(p.to_json()).digest() == p.digest()


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ParameterError):
        ModelParams.from_dict({"gamma_e": 1.0, "bogus": 2.0})


def test_digest_tracks_values():
    a = ModelParams()
    assert a.digest() == ModelParams().digest()
    assert a.digest() != ModelParams(alpha=1.0 + 1e-15).digest()


def test_rescaled_leaves_volume_and_inverts():
    p = ModelParams(delta_e=-3.0)
    q = p.rescaled(6.0)
    assert q.volume == p.volume
    assert q.delta_e == -18.0 and q.gamma_e == 6.0
    back = q.rescaled(1 / 6.0)
    for k, v in p.to_dict().items():
        assert getattr(back, k) == pytest.approx(v, rel=1e-15)


def test_validate_is_idempotent(params):
    assert validate(params) is params
