"""Utility modules."""

from lib.utils.failure_modes import (
    EnsembleCollapseError,
    TrackLossDetector,
    DegeneracyMonitor,
    FailureModeHandler
)

__all__ = [
    "EnsembleCollapseError",
    "TrackLossDetector",
    "DegeneracyMonitor",
    "FailureModeHandler",
]
