"""Physical parameters, unit conventions and derived complex rates.

All rates, detunings, couplings and frequencies are stored in units of the
intermediate-state decay rate ``gamma_e``.  Lengths are in an arbitrary unit
that only has to be shared by ``c6`` (rate x length^6) and ``volume``
(length^3).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .errors import InconsistentVolume, NegativeDecay, NonPositiveRate, ParameterError

# Feeding-side cavity loss used when none is given; only "much smaller than
# the detection-side loss" is known.
DEFAULT_GAMMA_C_F = 0.01
DEFAULT_COOPERATIVITY = 5.0
VOLUME_TOLERANCE = 0.01


def coupling_from_cooperativity(cooperativity: float, gamma_c: float, gamma_e: float) -> float:
    """Collective coupling g*sqrt(N) for the convention C = g^2 N / (gamma_c gamma_e)."""
    if cooperativity < 0 or gamma_c < 0 or gamma_e < 0:
        raise ParameterError("cooperativity and rates must be non-negative")
    return math.sqrt(cooperativity * gamma_c * gamma_e)


@dataclass(frozen=True)
class ModelParams:
    gamma_e: float = 1.0
    gamma_r: float = 0.15
    gamma_c_f: float = DEFAULT_GAMMA_C_F
    gamma_c_d: float = 0.3
    delta_c: float = 0.0
    delta_e: float = 0.0
    delta_r: float = 0.0
    g_sqrt_n: float = coupling_from_cooperativity(DEFAULT_COOPERATIVITY, DEFAULT_GAMMA_C_F + 0.3, 1.0)
    omega_cf: float = 1.0
    c6: float = -1.0
    volume: float = 1000.0
    alpha: float = 1.0

    @classmethod
    def from_cooperativity(cls, cooperativity: float, **kwargs) -> "ModelParams":
        """Build parameters with g*sqrt(N) derived from a cloud cooperativity."""
        base = cls(**kwargs)
        g = coupling_from_cooperativity(cooperativity, base.gamma_c_f + base.gamma_c_d, base.gamma_e)
        return replace(base, g_sqrt_n=g)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        return cls(**{k: float(v) for k, v in data.items()})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        return cls.from_dict(json.loads(text))

    def digest(self) -> str:
        """Short stable hash of the parameter values."""
        canon = json.dumps({k: repr(v) for k, v in self.to_dict().items()}, sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def rescaled(self, factor: float) -> "ModelParams":
        """Multiply every rate-like quantity by ``factor`` (lengths unchanged)."""
        values = self.to_dict()
        for name in values:
            if name != "volume":
                values[name] *= factor
        return ModelParams(**values)


@dataclass(frozen=True)
class ValidatedParams(ModelParams):
    """ModelParams that passed :func:`validate`, with derived complex rates."""

    @property
    def gamma_c(self) -> float:
        return self.gamma_c_f + self.gamma_c_d

    @property
    def Gc(self) -> complex:
        return complex(self.gamma_c, self.delta_c)

    @property
    def Ge(self) -> complex:
        return complex(self.gamma_e, self.delta_e)

    @property
    def Gr(self) -> complex:
        return complex(self.gamma_r, self.delta_r)

    @property
    def half_omega(self) -> float:
        return 0.5 * self.omega_cf

    def complex_rate(self, name: str) -> complex:
        """Gamma_nu = gamma_nu + i Delta_nu for nu in {'c', 'e', 'r'}."""
        return {"c": self.Gc, "e": self.Ge, "r": self.Gr}[name]


@dataclass(frozen=True)
class LatticeSpec:
    """Cubic lattice used by the discrete-sum oracles."""

    step: float
    dims: tuple[int, int, int]

    def __post_init__(self):
        if self.step <= 0:
            raise ParameterError("lattice step must be positive")
        if len(self.dims) != 3 or any(int(d) < 1 for d in self.dims):
            raise ParameterError("lattice dims must be three positive integers")
        if self.n_sites < 2:
            raise ParameterError("lattice needs at least two sites")

    @classmethod
    def for_volume(cls, volume: float, dims) -> "LatticeSpec":
        dims = tuple(int(d) for d in dims)
        step = (volume / float(np.prod(dims))) ** (1.0 / 3.0)
        return cls(step=step, dims=dims)

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.dims))

    @property
    def volume(self) -> float:
        return self.n_sites * self.step ** 3

    def displacements(self) -> np.ndarray:
        """Minimum-image distance of every site from the origin site, shape ``dims``."""
        axes = []
        for d in self.dims:
            n = np.arange(d)
            axes.append(np.minimum(n, d - n) * self.step)
        x, y, z = np.meshgrid(*axes, indexing="ij")
        return np.sqrt(x * x + y * y + z * z)

    def kappa(self, c6: float) -> np.ndarray:
        """Interaction c6 / r^6 on the lattice, with the origin term set to zero."""
        r = self.displacements()
        out = np.zeros_like(r)
        mask = r > 0
        out[mask] = c6 / r[mask] ** 6
        return out


def validate(params: ModelParams, lattice: LatticeSpec | None = None) -> ValidatedParams:
    """Check physical admissibility and return an immutable validated copy."""
    values = params.to_dict()
    for name, v in values.items():
        if not math.isfinite(v):
            raise ParameterError(f"{name} must be finite, got {v!r}")
    if params.gamma_e <= 0:
        raise NonPositiveRate("gamma_e is the unit rate and must be positive")
    for name in ("gamma_r", "gamma_c_f", "gamma_c_d", "alpha", "g_sqrt_n", "omega_cf"):
        if values[name] < 0:
            raise NegativeDecay(f"{name} must be non-negative, got {values[name]!r}")
    if params.gamma_c_f + params.gamma_c_d <= 0:
        raise NonPositiveRate("total cavity decay gamma_c must be positive")
    if params.volume <= 0:
        raise ParameterError("volume must be positive")
    if lattice is not None:
        mismatch = abs(lattice.volume - params.volume) / params.volume
        if mismatch > VOLUME_TOLERANCE:
            raise InconsistentVolume(
                f"lattice volume {lattice.volume:.6g} differs from model volume "
                f"{params.volume:.6g} by {100 * mismatch:.2f}%"
            )
    if isinstance(params, ValidatedParams):
        return params
    return ValidatedParams(**values)


def ensure_valid(params: ModelParams) -> ValidatedParams:
    if isinstance(params, ValidatedParams):
        return params
    return validate(params)


def updated(params: ModelParams, **changes) -> ValidatedParams:
    """Copy of ``params`` with ``changes`` applied, re-validated."""
    return validate(ModelParams(**{**params.to_dict(), **changes}))
