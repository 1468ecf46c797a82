"""
Exact geometric primitives shared by the simulator, likelihoods and bounds.

All functions broadcast over leading dimensions so a whole particle ensemble
can be evaluated in one call.
"""

import numpy as np
from typing import Union

from lib.data.schemas import Anchor, ExtentModel

ArrayLike = Union[np.ndarray, list, tuple]


def _anchor_xy(anchor: Union[Anchor, ArrayLike]) -> np.ndarray:
    if isinstance(anchor, Anchor):
        return anchor.xy
    return np.asarray(anchor, dtype=float)


def orientation_from_velocity(velocity: ArrayLike) -> float:
    """
    Body orientation from the heading.

    Args:
        velocity: 2-vector (m/s)

    Returns:
        Angle in (-pi, pi]
    """
    v = np.asarray(velocity, dtype=float)
    if np.hypot(v[0], v[1]) == 0.0:
        raise ValueError("undefined orientation: zero velocity")
    theta = float(np.arctan2(v[1], v[0]))
    if theta == -np.pi:
        theta = np.pi
    return theta


def orientations_from_velocities(
    velocities: np.ndarray,
    previous: np.ndarray,
    min_speed: float = 1e-3
) -> np.ndarray:
    """
    Vectorized orientation for an ensemble.

    Rows slower than min_speed keep their previous orientation.
    """
    velocities = np.asarray(velocities, dtype=float)
    theta = np.arctan2(velocities[..., 1], velocities[..., 0])
    slow = np.hypot(velocities[..., 0], velocities[..., 1]) < min_speed
    return np.where(slow, previous, theta)


def rotation_matrix(theta: Union[float, np.ndarray]) -> np.ndarray:
    """
    Planar rotation matrix.

    Args:
        theta: Angle(s) in radians, scalar or array of shape (...)

    Returns:
        Array of shape (..., 2, 2)
    """
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([c, -s], axis=-1), np.stack([s, c], axis=-1)], axis=-2)


def oriented_extent(model: ExtentModel, theta: Union[float, np.ndarray]) -> np.ndarray:
    """
    Rotate the base shape: X = A E A^T.

    Args:
        model: Extent model
        theta: Orientation(s)

    Returns:
        Extent matrix of shape (..., 2, 2)
    """
    rotation = rotation_matrix(theta)
    extent = rotation @ model.base_shape @ np.swapaxes(rotation, -1, -2)
    # keep exact symmetry
    return 0.5 * (extent + np.swapaxes(extent, -1, -2))


def los_distance(position: ArrayLike, anchor: Union[Anchor, ArrayLike]) -> np.ndarray:
    """LOS path length ||p - p_a||."""
    delta = np.asarray(position, dtype=float) - _anchor_xy(anchor)
    return np.linalg.norm(delta, axis=-1)


def active_scatter_distance(
    position: ArrayLike,
    bias: ArrayLike,
    scatter: ArrayLike,
    anchor: Union[Anchor, ArrayLike]
) -> np.ndarray:
    """
    Active scatter path length ||(p + b + q) - p_a||.

    The agent-to-scatter leg is not part of the delay.
    """
    point = (
        np.asarray(position, dtype=float)
        + np.asarray(bias, dtype=float)
        + np.asarray(scatter, dtype=float)
    )
    return los_distance(point, anchor)


def passive_scatter_distance(
    position: ArrayLike,
    bias: ArrayLike,
    scatter: ArrayLike,
    tx_anchor: Union[Anchor, ArrayLike],
    rx_anchor: Union[Anchor, ArrayLike]
) -> np.ndarray:
    """Bistatic path length tx -> scatter point -> rx."""
    point = (
        np.asarray(position, dtype=float)
        + np.asarray(bias, dtype=float)
        + np.asarray(scatter, dtype=float)
    )
    return los_distance(point, tx_anchor) + los_distance(point, rx_anchor)
