"""
Normalized amplitude model.

Amplitudes are handled in dB and converted to linear values for the noise
model. LOS follows free-space path loss from the reference level at 1 m;
active scatter adds the scattering coefficient beta_active; passive scatter
follows the bistatic 1/(d1 d2) law with a transmit level calibrated once per
scenario so passive returns sit passive_offset_db below the LOS amplitude at
the trajectory midpoint.
"""

import logging
from typing import Union

import numpy as np

from lib.models.geometry import los_distance
from lib.simulation.config import ScenarioConfig
from lib.simulation.trajectory import GroundTruth

logger = logging.getLogger(__name__)

ArrayOrFloat = Union[float, np.ndarray]


def db_to_linear(value_db: ArrayOrFloat) -> ArrayOrFloat:
    return 10.0 ** (np.asarray(value_db, dtype=float) / 20.0)


def linear_to_db(value: ArrayOrFloat) -> ArrayOrFloat:
    return 20.0 * np.log10(np.asarray(value, dtype=float))


class AmplitudeModel:
    """Deterministic path-loss amplitudes (dB)."""

    def __init__(self, config: ScenarioConfig, passive_tx_db: float):
        """
        Initialize amplitude model.

        Args:
            config: Scenario configuration
            passive_tx_db: Calibrated passive transmit level (dB at 1 m x 1 m)
        """
        self.ref_db = config.ref_amplitude_db
        self.active_gain_db = float(linear_to_db(config.beta_active))
        self.passive_gain_db = float(linear_to_db(config.beta_passive))
        self.passive_tx_db = passive_tx_db

    @classmethod
    def calibrated(cls, config: ScenarioConfig, truth: GroundTruth) -> "AmplitudeModel":
        """Calibrate the passive transmit level at the trajectory midpoint."""
        model = cls(config, passive_tx_db=0.0)
        pairs = config.passive_pairs()
        if not pairs:
            return model

        anchors = config.anchor_map
        state = truth.states[len(truth) // 2]
        center = state.body_center
        levels = []
        for rx, tx in pairs:
            los_db = model.los_db(los_distance(state.position, anchors[rx]))
            path_db = linear_to_db(
                los_distance(center, anchors[rx]) * los_distance(center, anchors[tx])
            )
            levels.append(los_db - config.passive_offset_db + path_db - model.passive_gain_db)
        model.passive_tx_db = float(np.mean(levels))
        logger.debug(f"Calibrated passive transmit level: {model.passive_tx_db:.2f} dB")
        return model

    def los_db(self, distance: ArrayOrFloat) -> ArrayOrFloat:
        return self.ref_db - linear_to_db(np.maximum(distance, 1e-9))

    def active_scatter_db(self, distance: ArrayOrFloat) -> ArrayOrFloat:
        return self.los_db(distance) + self.active_gain_db

    def passive_scatter_db(self, tx_distance: ArrayOrFloat, rx_distance: ArrayOrFloat) -> ArrayOrFloat:
        product = np.maximum(np.asarray(tx_distance) * np.asarray(rx_distance), 1e-12)
        return self.passive_tx_db - linear_to_db(product) + self.passive_gain_db

    def los_amplitude(self, distance: ArrayOrFloat) -> ArrayOrFloat:
        """Linear LOS amplitude, 100 at 1 m for the 40 dB reference."""
        return db_to_linear(self.los_db(distance))
