"""Few-photon observables of a cavity-embedded Rydberg-EIT ensemble.

Linear response, photon-pair correlation, the fourth-order elastic and
inelastic transmission spectrum, and the three-photon correlation from a
Faddeev-type resummation, each paired with an independent numerical oracle.
"""

__version__ = "0.1.0"

from .errors import ComputeError, ConfigError, ParameterError, RydcavError
from .model import LatticeSpec, ModelParams, ValidatedParams, coupling_from_cooperativity, validate

__all__ = [
    "ComputeError",
    "ConfigError",
    "LatticeSpec",
    "ModelParams",
    "ParameterError",
    "RydcavError",
    "ValidatedParams",
    "__version__",
    "coupling_from_cooperativity",
    "validate",
]
