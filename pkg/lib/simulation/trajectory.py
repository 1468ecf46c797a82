"""
Ground-truth trajectory generation.

The agent moves at constant speed along a polyline of waypoints. State n
(1-based) is the position at time n * dt; the waypoint start is state 0.
"""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from lib.data.schemas import AgentState
from lib.models.geometry import los_distance, orientation_from_velocity
from lib.simulation.config import ScenarioConfig

logger = logging.getLogger(__name__)

# Slack when comparing the required path length with the polyline length.
_PATH_TOLERANCE = 1e-9


@dataclass
class GroundTruth:
    """True agent states for steps 1..num_steps plus the initial state."""

    states: List[AgentState]
    orientations: np.ndarray
    initial_state: AgentState
    initial_orientation: float

    def __len__(self) -> int:
        return len(self.states)

    @property
    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.states])

    def state_at(self, step: int) -> AgentState:
        """State at a 1-based step."""
        return self.states[step - 1]


def _segment_velocity(waypoints: np.ndarray, segment: int, speed: float) -> np.ndarray:
    direction = waypoints[segment + 1] - waypoints[segment]
    return speed * direction / np.linalg.norm(direction)


def build_trajectory(config: ScenarioConfig) -> GroundTruth:
    """
    Piecewise-constant-velocity track through the waypoints.

    Args:
        config: Scenario configuration

    Returns:
        Ground truth with num_steps states and a constant bias
    """
    waypoints = config.waypoint_array
    lengths = np.linalg.norm(np.diff(waypoints, axis=0), axis=1)
    if np.any(lengths == 0):
        raise ValueError("waypoints must not repeat consecutively")
    cumulative = np.concatenate([[0.0], np.cumsum(lengths)])
    total = cumulative[-1]

    required = config.num_steps * config.dt * config.speed
    if required > total + _PATH_TOLERANCE:
        raise ValueError(
            f"trajectory underruns step count: {config.num_steps} steps need "
            f"{required:.3f} m of path, waypoints provide {total:.3f} m"
        )

    bias = np.asarray(config.bias, dtype=float)
    last_segment = len(lengths) - 1

    def state_at_arc(s: float) -> AgentState:
        segment = int(np.searchsorted(cumulative, s, side="right") - 1)
        segment = min(max(segment, 0), last_segment)
        velocity = _segment_velocity(waypoints, segment, config.speed)
        offset = s - cumulative[segment]
        position = waypoints[segment] + velocity / config.speed * offset
        return AgentState(position=position, velocity=velocity, bias=bias)

    states = [
        state_at_arc(min(n * config.dt * config.speed, total))
        for n in range(1, config.num_steps + 1)
    ]
    initial = state_at_arc(0.0)
    orientations = np.array([orientation_from_velocity(s.velocity) for s in states])

    truth = GroundTruth(
        states=states,
        orientations=orientations,
        initial_state=initial,
        initial_orientation=orientation_from_velocity(initial.velocity)
    )
    _check_range_window(truth, config)

    logger.debug(f"Built trajectory: {config.num_steps} steps over {required:.2f} m")
    return truth


def _check_range_window(truth: GroundTruth, config: ScenarioConfig):
    """d_max must cover every monostatic and bistatic range along the track."""
    anchors = config.anchor_map
    # Extent margin: the farthest scatter lies one long semi-axis from the center.
    margin = 2.0 * max(config.semi_axes)
    centers = np.array([s.body_center for s in truth.states])
    positions = truth.positions

    longest = 0.0
    for anchor in anchors.values():
        longest = max(longest, float(los_distance(positions, anchor).max()))
        longest = max(longest, float(los_distance(centers, anchor).max()) + margin)
    for rx, tx in config.passive_pairs():
        bistatic = los_distance(centers, anchors[rx]) + los_distance(centers, anchors[tx])
        longest = max(longest, float(bistatic.max()) + margin)

    if longest >= config.d_max:
        raise ValueError(
            f"d_max={config.d_max} m does not exceed the longest range {longest:.2f} m"
        )
