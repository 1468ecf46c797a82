"""Scenario simulation: trajectory, amplitudes and measurements."""

from lib.simulation.config import ScenarioConfig
from lib.simulation.trajectory import GroundTruth, build_trajectory
from lib.simulation.amplitude import AmplitudeModel, db_to_linear, linear_to_db
from lib.simulation.measurements import MeasurementGenerator, sample_scatter_on_ellipse

__all__ = [
    "ScenarioConfig",
    "GroundTruth",
    "build_trajectory",
    "AmplitudeModel",
    "db_to_linear",
    "linear_to_db",
    "MeasurementGenerator",
    "sample_scatter_on_ellipse",
]
