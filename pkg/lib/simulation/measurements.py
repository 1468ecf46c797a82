"""
Synthetic measurement generation at the parameter level.

Per step and channel the generator emits the LOS candidate (active, when not
blocked), a Poisson number of body scatter returns, and Poisson clutter.
Candidates below the detection threshold or outside [0, d_max] are dropped.
"""

import logging
from collections import Counter
from typing import List, Optional

import numpy as np
from scipy.stats import rayleigh

from lib.data.schemas import AgentState, Measurement, MeasurementSet, EXTENT_SCALE
from lib.likelihood.noise import NoiseModel, distance_std
from lib.models.geometry import (
    active_scatter_distance,
    los_distance,
    oriented_extent,
    passive_scatter_distance,
)
from lib.simulation.amplitude import AmplitudeModel, db_to_linear
from lib.simulation.config import ScenarioConfig
from lib.simulation.trajectory import GroundTruth

logger = logging.getLogger(__name__)


def sample_scatter_on_ellipse(
    extent: np.ndarray,
    rng: np.random.Generator,
    size: Optional[int] = None,
    scale: float = EXTENT_SCALE
) -> np.ndarray:
    """
    Draw scatter offsets uniformly over the solid ellipse of an extent.

    The ellipse is {q : q^T (X / scale)^-1 q <= 1}; with the default scale its
    covariance equals X.

    Args:
        extent: Oriented extent X (2x2, PSD)
        rng: Random generator
        size: Number of samples (None for a single 2-vector)
        scale: Ratio between squared semi-axes and eigenvalues of X

    Returns:
        Offsets of shape (2,) or (size, 2)
    """
    count = 1 if size is None else size
    eigvals, eigvecs = np.linalg.eigh(np.asarray(extent, dtype=float) / scale)
    root = eigvecs @ np.diag(np.sqrt(np.clip(eigvals, 0.0, None))) @ eigvecs.T

    radius = np.sqrt(rng.random(count))
    angle = rng.uniform(0.0, 2.0 * np.pi, count)
    disk = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)
    samples = disk @ root.T
    return samples[0] if size is None else samples


class MeasurementGenerator:
    """Generates measurement records; owns its random generator."""

    def __init__(
        self,
        config: ScenarioConfig,
        amplitude: AmplitudeModel,
        rng: np.random.Generator,
        noise: Optional[NoiseModel] = None
    ):
        """
        Initialize generator.

        Args:
            config: Scenario configuration
            amplitude: Calibrated amplitude model
            rng: Random generator (not shared with other generators)
            noise: Distance noise model (derived from the pulse when None)
        """
        self.config = config
        self.amplitude = amplitude
        self.rng = rng
        self.noise = noise or NoiseModel.from_pulse(config.rolloff, config.bandwidth_hz)
        self.anchors = config.anchor_map
        self.extent_model = config.extent_model

        self.candidates: Counter = Counter()
        self.rejected: Counter = Counter()

    @property
    def rejection_rate(self) -> float:
        """Fraction of object-originated candidates dropped below threshold."""
        total = self.candidates["object"]
        return self.rejected["object"] / total if total else 0.0

    def _noisy_distance(self, distance: np.ndarray, amplitude: np.ndarray) -> np.ndarray:
        if not self.config.distance_noise:
            return distance
        return distance + self.rng.normal(size=np.shape(distance)) * distance_std(amplitude, self.noise)

    def _fade(self, amplitude_db: np.ndarray) -> np.ndarray:
        if self.config.fading_std_db > 0:
            amplitude_db = amplitude_db + self.rng.normal(0.0, self.config.fading_std_db, np.shape(amplitude_db))
        return amplitude_db

    def _emit(
        self,
        distances: np.ndarray,
        amplitudes: np.ndarray,
        rx: int,
        tx: Optional[int],
        origin: str
    ) -> List[Measurement]:
        distances = np.atleast_1d(distances)
        amplitudes = np.atleast_1d(amplitudes)
        keep = (
            (amplitudes >= self.config.gamma)
            & (distances >= 0.0)
            & (distances <= self.config.d_max)
        )
        kind = "clutter" if origin == "clutter" else "object"
        self.candidates[kind] += len(distances)
        self.rejected[kind] += int(np.count_nonzero(~keep))
        return [
            Measurement(distance=float(d), amplitude=float(u), rx_anchor=rx, tx_anchor=tx, origin=origin)
            for d, u in zip(distances[keep], amplitudes[keep])
        ]

    def _scatters(self, theta: float, count: int) -> np.ndarray:
        extent = oriented_extent(self.extent_model, theta)
        return sample_scatter_on_ellipse(extent, self.rng, size=count, scale=self.extent_model.scale)

    def generate_clutter(self, rx: int, tx: Optional[int] = None) -> List[Measurement]:
        """
        Clutter: Poisson count, uniform distance, Rayleigh amplitude above gamma.

        Args:
            rx: Receiving anchor id
            tx: Transmitting anchor id (None for active channels)

        Returns:
            Clutter measurements
        """
        count = self.rng.poisson(self.config.mu_clutter)
        distances = self.rng.uniform(0.0, self.config.d_max, count)
        # Inverse survival function of the unit Rayleigh truncated below at gamma.
        tail = rayleigh.sf(self.config.gamma)
        amplitudes = rayleigh.isf(tail * (1.0 - self.rng.random(count)))
        amplitudes = np.maximum(amplitudes, self.config.gamma)
        return self._emit(distances, amplitudes, rx, tx, "clutter")

    def generate_active(
        self,
        state: AgentState,
        theta: float,
        anchor_id: int,
        blocked: bool
    ) -> List[Measurement]:
        """
        Active measurements received at one anchor.

        Args:
            state: True agent state
            theta: True body orientation
            anchor_id: Receiving anchor
            blocked: Whether the LOS path is obstructed

        Returns:
            Measurements sorted by distance
        """
        anchor = self.anchors[anchor_id]
        measurements: List[Measurement] = []

        if not blocked:
            distance = float(los_distance(state.position, anchor))
            amplitude = db_to_linear(self._fade(self.amplitude.los_db(distance)))
            measurements += self._emit(
                self._noisy_distance(np.array([distance]), amplitude), amplitude, anchor_id, None, "los"
            )

        count = self.rng.poisson(self.config.mu_meas)
        if count:
            scatters = self._scatters(theta, count)
            distances = active_scatter_distance(state.position, state.bias, scatters, anchor)
            amplitudes = db_to_linear(self._fade(self.amplitude.active_scatter_db(distances)))
            measurements += self._emit(
                self._noisy_distance(distances, amplitudes), amplitudes, anchor_id, None, "scatter"
            )

        measurements += self.generate_clutter(anchor_id)
        return sorted(measurements, key=lambda m: m.distance)

    def generate_passive(
        self,
        state: AgentState,
        theta: float,
        tx_anchor_id: int,
        rx_anchor_id: int
    ) -> List[Measurement]:
        """
        Passive measurements of the tx -> body -> rx path.

        Args:
            state: True agent state
            theta: True body orientation
            tx_anchor_id: Transmitting anchor
            rx_anchor_id: Receiving anchor

        Returns:
            Measurements sorted by distance
        """
        if tx_anchor_id not in self.config.passive_tx_anchor_ids:
            raise ValueError(f"anchor {tx_anchor_id} is not a passive transmitter")
        tx = self.anchors[tx_anchor_id]
        rx = self.anchors[rx_anchor_id]
        measurements: List[Measurement] = []

        count = self.rng.poisson(self.config.mu_meas)
        if count:
            scatters = self._scatters(theta, count)
            point = state.position + state.bias + scatters
            distances = passive_scatter_distance(state.position, state.bias, scatters, tx, rx)
            amplitudes = db_to_linear(self._fade(
                self.amplitude.passive_scatter_db(los_distance(point, tx), los_distance(point, rx))
            ))
            measurements += self._emit(
                self._noisy_distance(distances, amplitudes), amplitudes, rx_anchor_id, tx_anchor_id, "scatter"
            )

        measurements += self.generate_clutter(rx_anchor_id, tx_anchor_id)
        return sorted(measurements, key=lambda m: m.distance)

    def generate_step(self, truth: GroundTruth, step: int) -> MeasurementSet:
        """
        All active and passive measurements of one 1-based step.

        Args:
            truth: Ground truth trajectory
            step: Time step in [1, num_steps]

        Returns:
            Measurement set of the step
        """
        if not 1 <= step <= len(truth):
            raise ValueError(f"step must be in [1, {len(truth)}], got {step}")
        state = truth.state_at(step)
        theta = float(truth.orientations[step - 1])
        blocked = self.config.is_blocked(step)

        measurement_set = MeasurementSet(time_index=step)
        for anchor in self.config.anchors:
            measurement_set.active[anchor.id] = self.generate_active(state, theta, anchor.id, blocked)
        for rx, tx in self.config.passive_pairs():
            measurement_set.passive[(rx, tx)] = self.generate_passive(state, theta, tx, rx)
        return measurement_set

    def generate_record(self, truth: GroundTruth) -> List[MeasurementSet]:
        """Measurement sets for steps 1..num_steps."""
        record = [self.generate_step(truth, n) for n in range(1, len(truth) + 1)]
        if self.rejection_rate > 0.5:
            logger.warning(f"High sub-threshold rejection rate: {self.rejection_rate:.1%}")
        return record
