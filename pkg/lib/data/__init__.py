"""Domain data types."""

from lib.data.schemas import (
    AgentState,
    ExtentModel,
    Anchor,
    Channel,
    Measurement,
    MeasurementSet,
    EXTENT_SCALE,
    STATE_DIM,
)

__all__ = [
    "AgentState",
    "ExtentModel",
    "Anchor",
    "Channel",
    "Measurement",
    "MeasurementSet",
    "EXTENT_SCALE",
    "STATE_DIM",
]
