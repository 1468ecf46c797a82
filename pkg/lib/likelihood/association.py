"""
Data association: pseudo-likelihoods and the per-step likelihood factor.

Every measurement carries a binary association variable (object-related or
clutter). Because the variables are independent given the state, summing the
joint posterior over all association vectors factorizes into a product of
per-measurement terms (1 + mu_m f / (mu_c f_c)), which is what the particle
weights are multiplied by each step.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Mapping, Optional, Union

import numpy as np
from scipy.special import logsumexp

from lib.data.schemas import AgentState, Anchor, Channel, Measurement, MeasurementSet
from lib.likelihood.measurement_models import (
    StateLike,
    active_model_log_density,
    los_log_density,
    measurement_arrays,
    scatter_log_density,
    state_arrays,
)
from lib.likelihood.noise import NoiseModel
from lib.likelihood.unscented import UtConfig

logger = logging.getLogger(__name__)


class EstimatorMode(str, Enum):
    """Estimator variants."""

    A_PDA = "a-pda"        # active only, at most one LOS measurement per anchor
    A_EOPDA = "a-eopda"    # active only, extended-object association
    AP_EOPDA = "ap-eopda"  # active and passive, extended-object association

    @classmethod
    def parse(cls, value: Union[str, "EstimatorMode"]) -> "EstimatorMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"apda": cls.A_PDA, "aeopda": cls.A_EOPDA, "apeopda": cls.AP_EOPDA}
        try:
            return cls(key)
        except ValueError:
            if key.replace("-", "") in aliases:
                return aliases[key.replace("-", "")]
            raise ValueError(f"unknown estimator mode: {value!r}")


@dataclass(frozen=True)
class AssociationParams:
    """Poisson object/clutter rates and the clutter distance density."""

    mu_meas: float = 5.0
    mu_clutter: float = 10.0
    clutter_density: float = 1.0 / 30.0

    def __post_init__(self):
        for name in ("mu_meas", "mu_clutter"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)}")
        if self.clutter_density <= 0:
            raise ValueError(f"clutter_density must be positive, got {self.clutter_density}")

    @classmethod
    def from_max_distance(cls, mu_meas: float, mu_clutter: float, d_max: float) -> "AssociationParams":
        return cls(mu_meas=mu_meas, mu_clutter=mu_clutter, clutter_density=1.0 / d_max)

    @property
    def clutter_free(self) -> bool:
        return self.mu_clutter == 0

    @property
    def log_clutter_intensity(self) -> float:
        """log(mu_c f_c); -inf without clutter."""
        with np.errstate(divide="ignore"):
            return float(np.log(self.mu_clutter * self.clutter_density))


class AssociationLikelihood:
    """Evaluates pseudo-likelihoods and per-step weight factors."""

    def __init__(
        self,
        anchors: Mapping[int, Anchor],
        noise: NoiseModel,
        assoc: AssociationParams,
        ut: Optional[UtConfig] = None,
        detection_probability: float = 0.95
    ):
        """
        Initialize the association likelihood.

        Args:
            anchors: Anchors by id
            noise: Distance noise model
            assoc: Association parameters
            ut: Sigma-point scheme for the extent spread
            detection_probability: LOS detection probability of the A-PDA variant
        """
        if not 0.0 <= detection_probability <= 1.0:
            raise ValueError(f"detection_probability must be in [0, 1], got {detection_probability}")
        self.anchors: Dict[int, Anchor] = dict(anchors)
        self.noise = noise
        self.assoc = assoc
        self.ut = ut or UtConfig()
        self.detection_probability = detection_probability

    def _anchor(self, anchor_id: int) -> Anchor:
        try:
            return self.anchors[anchor_id]
        except KeyError:
            raise ValueError(f"measurement references unknown anchor {anchor_id}") from None

    def object_log_density(
        self,
        measurements,
        state: StateLike,
        extent: np.ndarray,
        channel: Channel
    ) -> np.ndarray:
        """log f_A (active channel) or log f_P (passive channel), shape (..., M)."""
        distances, amplitudes = measurement_arrays(measurements)
        position, bias = state_arrays(state)
        rx = self._anchor(channel.rx)
        if channel.is_active:
            return active_model_log_density(
                distances, amplitudes, position, bias, extent, rx, self.noise, self.ut
            )
        tx = self._anchor(channel.tx)
        return scatter_log_density(
            distances, amplitudes, position, bias, extent, rx, tx, self.noise, self.ut
        )

    def log_ratio(self, measurements, state: StateLike, extent: np.ndarray, channel: Channel) -> np.ndarray:
        """log(mu_m f / (mu_c f_c)) per measurement."""
        with np.errstate(divide="ignore"):
            log_mu = np.log(self.assoc.mu_meas)
        return (
            log_mu
            + self.object_log_density(measurements, state, extent, channel)
            - self.assoc.log_clutter_intensity
        )

    def _object_term(self, measurements, state: StateLike, extent: np.ndarray, channel: Channel) -> np.ndarray:
        """
        log(1 + mu_m f / (mu_c f_c)) summed over a channel's measurements.

        Without clutter the factor is taken up to a state-independent constant,
        mu_c f_c (1 + ratio) / mu_m -> f.
        """
        if not self.assoc.clutter_free:
            return np.logaddexp(0.0, self.log_ratio(measurements, state, extent, channel)).sum(axis=-1)
        return self.object_log_density(measurements, state, extent, channel).sum(axis=-1)

    def pseudo_likelihood(
        self,
        z: Measurement,
        state: StateLike,
        extent: np.ndarray,
        channel: Channel,
        association: int
    ):
        """
        Pseudo-likelihood g(z | x, X, a).

        Args:
            z: Measurement
            state: Agent state or particle array
            extent: Oriented extent
            channel: Channel of z
            association: 1 for object-related, 0 for clutter

        Returns:
            Factor value(s)
        """
        if association not in (0, 1):
            raise ValueError(f"association must be 0 or 1, got {association}")
        ratio = np.exp(self.log_ratio(z, state, extent, channel)[..., 0])
        if association == 0:
            ratio = np.ones_like(ratio)
        return float(ratio) if isinstance(state, AgentState) else ratio

    def _pda_channel(self, measurements, position: np.ndarray, channel: Channel) -> np.ndarray:
        """
        log((1 - P_d) lambda + P_d sum f_LOS) - log(lambda), lambda = mu_c f_c.

        Without clutter the -log(lambda) constant is dropped.
        """
        distances, amplitudes = measurement_arrays(measurements)
        log_los = los_log_density(distances, amplitudes, position, self._anchor(channel.rx), self.noise)
        log_clutter = self.assoc.log_clutter_intensity
        with np.errstate(divide="ignore"):
            miss = np.log1p(-self.detection_probability) + log_clutter
            hit = np.log(self.detection_probability)
        terms = np.concatenate(
            [np.full(log_los.shape[:-1] + (1,), miss), hit + log_los],
            axis=-1
        )
        total = logsumexp(terms, axis=-1)
        return total if self.assoc.clutter_free else total - log_clutter

    def step_log_likelihood(
        self,
        state: StateLike,
        extent: np.ndarray,
        measurement_set: MeasurementSet,
        mode: EstimatorMode
    ):
        """
        Log of the association-marginalized factor of one time step.

        Channels without measurements contribute a factor 1.

        Args:
            state: Agent state or particle array (I, 6)
            extent: Oriented extent(s), (2, 2) or (I, 2, 2)
            measurement_set: Measurements of the step
            mode: Estimator variant

        Returns:
            Log-factor, scalar or shape (I,)
        """
        mode = EstimatorMode.parse(mode)
        position, _ = state_arrays(state)
        total = np.zeros(position.shape[:-1])

        for channel, measurements in measurement_set.channels():
            if not measurements:
                continue
            if mode is EstimatorMode.A_PDA:
                if channel.is_active:
                    total = total + self._pda_channel(measurements, position, channel)
                continue
            if not channel.is_active and mode is not EstimatorMode.AP_EOPDA:
                continue
            total = total + self._object_term(measurements, state, extent, channel)

        return float(total) if total.ndim == 0 else total

    def step_likelihood(
        self,
        state: StateLike,
        extent: np.ndarray,
        measurement_set: MeasurementSet,
        mode: EstimatorMode
    ):
        """Per-step weight factor (linear domain)."""
        return np.exp(self.step_log_likelihood(state, extent, measurement_set, mode))
