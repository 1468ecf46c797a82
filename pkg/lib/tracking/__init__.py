"""Particle-based tracking of the extended agent."""

from lib.tracking.motion import MotionModel
from lib.tracking.particles import (
    ParticleEnsemble,
    init_ensemble,
    systematic_resample,
    resample_if_needed,
    mmse_estimate,
)
from lib.tracking.tracker import (
    FilterConfig,
    ParticleTracker,
    TrackerOutput,
    predict,
    update,
    run_filter,
)

__all__ = [
    "MotionModel",
    "ParticleEnsemble",
    "init_ensemble",
    "systematic_resample",
    "resample_if_needed",
    "mmse_estimate",
    "FilterConfig",
    "ParticleTracker",
    "TrackerOutput",
    "predict",
    "update",
    "run_filter",
]
