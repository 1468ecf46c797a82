"""Geometric primitives."""

from lib.models.geometry import (
    orientation_from_velocity,
    orientations_from_velocities,
    rotation_matrix,
    oriented_extent,
    los_distance,
    active_scatter_distance,
    passive_scatter_distance,
)

__all__ = [
    "orientation_from_velocity",
    "orientations_from_velocities",
    "rotation_matrix",
    "oriented_extent",
    "los_distance",
    "active_scatter_distance",
    "passive_scatter_distance",
]
