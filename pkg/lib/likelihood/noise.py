"""
Distance-noise model derived from the delay Fisher information.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import constants
from scipy.integrate import quad


def raised_cosine_spectrum(frequency: float, rolloff: float, bandwidth_hz: float) -> float:
    """
    Energy spectrum |S(f)|^2 of a root-raised-cosine pulse.

    The squared RRC spectrum is the raised-cosine spectrum. bandwidth_hz is the
    symbol rate 1/T, so the occupied band is (1 + rolloff) * bandwidth_hz.
    """
    f = abs(frequency)
    half = 0.5 * bandwidth_hz
    inner = (1.0 - rolloff) * half
    outer = (1.0 + rolloff) * half
    if f <= inner:
        return 1.0
    if f > outer:
        return 0.0
    return 0.5 * (1.0 + np.cos(np.pi * (f - inner) / (2.0 * rolloff * half)))


def rms_bandwidth(rolloff: float, bandwidth_hz: float) -> float:
    """
    Root mean squared bandwidth of the transmit pulse.

    Args:
        rolloff: Roll-off factor in [0, 1]
        bandwidth_hz: Symbol-rate bandwidth (Hz)

    Returns:
        beta_bw (Hz)
    """
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError(f"rolloff must be in [0, 1], got {rolloff}")
    if bandwidth_hz <= 0:
        raise ValueError(f"bandwidth_hz must be positive, got {bandwidth_hz}")

    half = 0.5 * bandwidth_hz
    upper = (1.0 + rolloff) * half
    breakpoints = [(1.0 - rolloff) * half] if 0.0 < rolloff < 1.0 else None

    # Even spectrum: integrate over f >= 0 only.
    energy, _ = quad(
        raised_cosine_spectrum, 0.0, upper,
        args=(rolloff, bandwidth_hz), points=breakpoints, limit=200
    )
    second_moment, _ = quad(
        lambda f: f * f * raised_cosine_spectrum(f, rolloff, bandwidth_hz),
        0.0, upper, points=breakpoints, limit=200
    )
    return float(np.sqrt(second_moment / energy))


@dataclass(frozen=True)
class NoiseModel:
    """Fisher-information distance noise, sigma_d^2 = c^2 / (8 pi^2 beta^2 u^2)."""

    rms_bandwidth_hz: float
    speed_of_light: float = constants.c

    def __post_init__(self):
        if self.rms_bandwidth_hz <= 0:
            raise ValueError(f"rms_bandwidth_hz must be positive, got {self.rms_bandwidth_hz}")

    @classmethod
    def from_pulse(cls, rolloff: float, bandwidth_hz: float) -> "NoiseModel":
        return cls(rms_bandwidth_hz=rms_bandwidth(rolloff, bandwidth_hz))

    @property
    def std_amplitude_product(self) -> float:
        """sigma_d * u, constant over amplitudes."""
        return self.speed_of_light / (2.0 * np.sqrt(2.0) * np.pi * self.rms_bandwidth_hz)


def distance_std(amplitude: Union[float, np.ndarray], noise: NoiseModel) -> Union[float, np.ndarray]:
    """
    Distance standard deviation for a normalized linear amplitude.

    Args:
        amplitude: Linear amplitude(s) u > 0
        noise: Noise model

    Returns:
        sigma_d in meters, same shape as amplitude
    """
    u = np.asarray(amplitude, dtype=float)
    if np.any(u <= 0):
        raise ValueError("amplitude must be positive for the distance variance")
    std = noise.std_amplitude_product / u
    return float(std) if std.ndim == 0 else std
