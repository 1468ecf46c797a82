"""
Posterior Cramer-Rao lower bound with LOS to every anchor always available.

Covers the kinematic substate [p, v]; LOS ranges carry no bias information,
so the bias is left out and the bound is compared with position RMSE only.
The Fisher information is evaluated along the true trajectory.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from lib.data.schemas import AgentState, Anchor
from lib.likelihood.noise import NoiseModel, distance_std
from lib.models.geometry import los_distance
from lib.simulation.amplitude import AmplitudeModel
from lib.simulation.config import ScenarioConfig
from lib.simulation.trajectory import GroundTruth
from lib.tracking.motion import MotionModel
from lib.tracking.tracker import FilterConfig

logger = logging.getLogger(__name__)


class SingularInformationError(RuntimeError):
    """The information matrix could not be inverted."""

    def __init__(self, step: int):
        super().__init__(f"singular information matrix at step {step}")
        self.step = step


@dataclass
class BoundTrace:
    """Per-step position-error bound."""

    position_bound: np.ndarray   # (N,) meters
    information: np.ndarray      # (N, 4, 4)

    def __len__(self) -> int:
        return len(self.position_bound)


def los_information(
    state: AgentState,
    anchors: Iterable[Anchor],
    noise: NoiseModel,
    amplitude_model: AmplitudeModel
) -> np.ndarray:
    """
    Fisher information of the LOS ranges for the kinematic substate.

    Args:
        state: Agent state
        anchors: Anchors with LOS
        noise: Distance noise model
        amplitude_model: Provides the LOS amplitude per distance

    Returns:
        4x4 information matrix (velocity block zero)
    """
    information = np.zeros((4, 4))
    for anchor in anchors:
        distance = float(los_distance(state.position, anchor))
        if distance == 0.0:
            raise ValueError(f"state coincides with anchor {anchor.id}")
        direction = (state.position - anchor.xy) / distance
        std = distance_std(amplitude_model.los_amplitude(distance), noise)
        information[:2, :2] += np.outer(direction, direction) / std ** 2
    return information


def _inverse(matrix: np.ndarray, step: int) -> np.ndarray:
    try:
        inverse = np.linalg.inv(matrix)
    except np.linalg.LinAlgError:
        raise SingularInformationError(step) from None
    if not np.all(np.isfinite(inverse)):
        raise SingularInformationError(step)
    return 0.5 * (inverse + inverse.T)


def pcrlb_recursion(
    truth: GroundTruth,
    scenario: ScenarioConfig,
    config: FilterConfig,
    amplitude_model: AmplitudeModel,
    noise: Optional[NoiseModel] = None,
    anchors: Optional[Iterable[Anchor]] = None
) -> BoundTrace:
    """
    Recursive PCRLB for linear-Gaussian dynamics and LOS range measurements.

    J_n = (Q + F J_{n-1}^-1 F^T)^-1 + J_Z(x_n), with J_0 from the tracker prior.

    Args:
        truth: True trajectory
        scenario: Scenario configuration
        config: Filter configuration (motion noise and prior)
        amplitude_model: Amplitude model for the LOS noise level
        noise: Distance noise model (derived from the pulse when None)
        anchors: Anchors to use (scenario anchors when None)

    Returns:
        Bound trace with one entry per step
    """
    noise = noise or NoiseModel.from_pulse(scenario.rolloff, scenario.bandwidth_hz)
    anchors = list(scenario.anchors if anchors is None else anchors)
    motion = MotionModel(dt=scenario.dt, accel_std=config.accel_std, bias_std=config.bias_std)
    transition = motion.transition
    process = motion.process_covariance

    prior = config.prior_covariance()[:4, :4]
    information = _inverse(prior, 0)

    bounds = np.empty(len(truth))
    history = np.empty((len(truth), 4, 4))
    for index, state in enumerate(truth.states):
        step = index + 1
        predicted = transition @ _inverse(information, step) @ transition.T + process
        information = _inverse(predicted, step) + los_information(state, anchors, noise, amplitude_model)
        information = 0.5 * (information + information.T)

        covariance = _inverse(information, step)
        bounds[index] = np.sqrt(np.trace(covariance[:2, :2]))
        history[index] = information

    logger.debug(f"PCRLB: final position bound {bounds[-1]:.4f} m")
    return BoundTrace(position_bound=bounds, information=history)
