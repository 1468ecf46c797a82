"""Measurement likelihoods and association."""

from lib.likelihood.noise import NoiseModel, distance_std, rms_bandwidth
from lib.likelihood.unscented import UtConfig, ut_scatter_variance
from lib.likelihood.measurement_models import (
    los_lhf,
    active_scatter_lhf,
    passive_scatter_lhf,
    active_model,
    passive_model,
)
from lib.likelihood.association import (
    AssociationLikelihood,
    AssociationParams,
    EstimatorMode,
)

__all__ = [
    "NoiseModel",
    "distance_std",
    "rms_bandwidth",
    "UtConfig",
    "ut_scatter_variance",
    "los_lhf",
    "active_scatter_lhf",
    "passive_scatter_lhf",
    "active_model",
    "passive_model",
    "AssociationLikelihood",
    "AssociationParams",
    "EstimatorMode",
]
