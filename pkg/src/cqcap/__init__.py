"""Capacities, Holevo quantities and error exponents for energy-constrained
classical-quantum channels, with Gaussian and photon channels worked out in a
truncated Fock space.

Modules:

* :mod:`cqcap.fock` - states, operators and entropies on a truncated Fock space
* :mod:`cqcap.channel` - finite ensembles, Holevo quantity, measured information
* :mod:`cqcap.gaussian` - Gaussian and photon channel closed forms
* :mod:`cqcap.discretizer` - finite partitions of continuous priors
* :mod:`cqcap.reliability` - random-coding and expurgated exponents
* :mod:`cqcap.montecarlo` - random codes with square-root-measurement decoding
* :mod:`cqcap.cli` - the ``cqcap`` command
"""

from .channel import (
    Ensemble,
    Povm,
    average_state,
    constraint_value,
    holevo_quantity,
    mutual_information,
)
from .errors import (
    DegenerateLevelSet,
    DimensionMismatch,
    DomainError,
    NoRoot,
    SamplingTimeout,
    TruncationError,
)
from .fock import (
    DensityOperator,
    StateVector,
    coherent_state,
    displaced_thermal,
    displacement,
    thermal_state,
    von_neumann_entropy,
)
from .gaussian import GaussianChannel, gaussian_capacity, thermal_entropy

__all__ = [
    "DegenerateLevelSet",
    "DensityOperator",
    "DimensionMismatch",
    "DomainError",
    "Ensemble",
    "GaussianChannel",
    "NoRoot",
    "Povm",
    "SamplingTimeout",
    "StateVector",
    "TruncationError",
    "average_state",
    "coherent_state",
    "constraint_value",
    "displaced_thermal",
    "displacement",
    "gaussian_capacity",
    "holevo_quantity",
    "mutual_information",
    "thermal_entropy",
    "thermal_state",
    "von_neumann_entropy",
]
