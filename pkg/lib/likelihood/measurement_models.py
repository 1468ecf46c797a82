"""
Measurement likelihood functions.

Each density is Gaussian in the measured distance with an amplitude-dependent
variance. Scattering densities add the extent-induced range spread obtained
by the unscented transform. All functions accept either a single AgentState or
a particle array of shape (I, 6), and one Measurement or a list of them;
the *_log_density helpers return arrays of shape (I, M).
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import norm

from lib.data.schemas import AgentState, Anchor, Measurement, POSITION, BIAS
from lib.likelihood.noise import NoiseModel, distance_std
from lib.likelihood.unscented import UtConfig, ut_scatter_variance
from lib.models.geometry import los_distance

StateLike = Union[AgentState, np.ndarray]
MeasurementLike = Union[Measurement, Sequence[Measurement]]


def state_arrays(state: StateLike) -> Tuple[np.ndarray, np.ndarray]:
    """Split a state (or particle array) into position and bias arrays."""
    if isinstance(state, AgentState):
        vector = state.as_vector()
    else:
        vector = np.asarray(state, dtype=float)
    return vector[..., POSITION], vector[..., BIAS]


def measurement_arrays(measurements: MeasurementLike) -> Tuple[np.ndarray, np.ndarray]:
    """Distances and amplitudes of one or more measurements."""
    if isinstance(measurements, Measurement):
        measurements = [measurements]
    distances = np.array([m.distance for m in measurements], dtype=float)
    amplitudes = np.array([m.amplitude for m in measurements], dtype=float)
    return distances, amplitudes


def los_log_density(
    distances: np.ndarray,
    amplitudes: np.ndarray,
    position: np.ndarray,
    anchor: Anchor,
    noise: NoiseModel
) -> np.ndarray:
    mean = los_distance(position, anchor)[..., None]
    return norm.logpdf(distances, loc=mean, scale=distance_std(amplitudes, noise))


def scatter_log_density(
    distances: np.ndarray,
    amplitudes: np.ndarray,
    position: np.ndarray,
    bias: np.ndarray,
    extent: np.ndarray,
    rx: Anchor,
    tx: Optional[Anchor],
    noise: NoiseModel,
    ut: UtConfig
) -> np.ndarray:
    """Active (tx=None) or passive scattering log-density, shape (..., M)."""
    center = position + bias
    mean = los_distance(center, rx)
    if tx is not None:
        mean = mean + los_distance(center, tx)
    spread = ut_scatter_variance(
        center, extent, rx.xy, None if tx is None else tx.xy, ut
    )
    variance = distance_std(amplitudes, noise) ** 2 + spread[..., None]
    return norm.logpdf(distances, loc=mean[..., None], scale=np.sqrt(variance))


def _squeeze(values: np.ndarray, state: StateLike, z: MeasurementLike):
    if isinstance(z, Measurement):
        values = values[..., 0]
    if isinstance(state, AgentState):
        return float(values) if np.ndim(values) == 0 else values
    return values


def los_lhf(z: MeasurementLike, state: StateLike, anchor: Anchor, noise: NoiseModel):
    """
    LOS likelihood f_LOS(z | x).

    Args:
        z: Measurement(s)
        state: Agent state or particle array (I, 6)
        anchor: Receiving anchor
        noise: Noise model

    Returns:
        Density value(s)
    """
    distances, amplitudes = measurement_arrays(z)
    position, _ = state_arrays(state)
    return _squeeze(np.exp(los_log_density(distances, amplitudes, position, anchor, noise)), state, z)


def active_scatter_lhf(
    z: MeasurementLike,
    state: StateLike,
    extent: np.ndarray,
    anchor: Anchor,
    noise: NoiseModel,
    ut: Optional[UtConfig] = None
):
    """Active scattering likelihood f_AS(z | x, X)."""
    distances, amplitudes = measurement_arrays(z)
    position, bias = state_arrays(state)
    log_density = scatter_log_density(
        distances, amplitudes, position, bias, extent, anchor, None, noise, ut or UtConfig()
    )
    return _squeeze(np.exp(log_density), state, z)


def passive_scatter_lhf(
    z: MeasurementLike,
    state: StateLike,
    extent: np.ndarray,
    tx_anchor: Anchor,
    rx_anchor: Anchor,
    noise: NoiseModel,
    ut: Optional[UtConfig] = None
):
    """Passive scattering likelihood f_PS(z | x, X) for the tx -> rx pair."""
    distances, amplitudes = measurement_arrays(z)
    position, bias = state_arrays(state)
    log_density = scatter_log_density(
        distances, amplitudes, position, bias, extent, rx_anchor, tx_anchor, noise, ut or UtConfig()
    )
    return _squeeze(np.exp(log_density), state, z)


def active_model_log_density(
    distances: np.ndarray,
    amplitudes: np.ndarray,
    position: np.ndarray,
    bias: np.ndarray,
    extent: np.ndarray,
    anchor: Anchor,
    noise: NoiseModel,
    ut: UtConfig
) -> np.ndarray:
    """log(f_LOS + f_AS)."""
    return np.logaddexp(
        los_log_density(distances, amplitudes, position, anchor, noise),
        scatter_log_density(distances, amplitudes, position, bias, extent, anchor, None, noise, ut)
    )


def active_model(
    z: MeasurementLike,
    state: StateLike,
    extent: np.ndarray,
    anchor: Anchor,
    noise: NoiseModel,
    ut: Optional[UtConfig] = None
):
    """Composite active model f_A = f_LOS + f_AS."""
    distances, amplitudes = measurement_arrays(z)
    position, bias = state_arrays(state)
    log_density = active_model_log_density(
        distances, amplitudes, position, bias, extent, anchor, noise, ut or UtConfig()
    )
    return _squeeze(np.exp(log_density), state, z)


def passive_model(
    z: MeasurementLike,
    state: StateLike,
    extent: np.ndarray,
    tx_anchor: Anchor,
    rx_anchor: Anchor,
    noise: NoiseModel,
    ut: Optional[UtConfig] = None
):
    """Composite passive model f_P = f_PS."""
    return passive_scatter_lhf(z, state, extent, tx_anchor, rx_anchor, noise, ut)
