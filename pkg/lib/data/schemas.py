"""
Data schemas for the extended-agent positioning system.

Defines:
- Agent state (position, velocity, body-center bias)
- Extent model of the scattering body
- Anchors, channels and extracted measurements
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np


# Ratio between the squared semi-axes and the eigenvalues of E. A quarter
# matches the second moment of a uniform solid ellipse.
EXTENT_SCALE = 0.25

STATE_DIM = 6

# State vector layout: [p_x, p_y, v_x, v_y, b_x, b_y]
POSITION = slice(0, 2)
VELOCITY = slice(2, 4)
BIAS = slice(4, 6)
KINEMATIC = slice(0, 4)


def _as_vector(value, name: str) -> np.ndarray:
    vector = np.asarray(value, dtype=float).reshape(2)
    if not np.all(np.isfinite(vector)):
        raise ValueError(f"{name} must be finite, got {vector}")
    return vector


@dataclass
class AgentState:
    """State of the extended agent at one time step."""

    position: np.ndarray
    velocity: np.ndarray
    bias: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        self.position = _as_vector(self.position, "position")
        self.velocity = _as_vector(self.velocity, "velocity")
        self.bias = _as_vector(self.bias, "bias")

    @property
    def body_center(self) -> np.ndarray:
        """Center of the scattering body, p + b."""
        return self.position + self.bias

    def as_vector(self) -> np.ndarray:
        """Stack into the 6-vector [p, v, b]."""
        return np.concatenate([self.position, self.velocity, self.bias])

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "AgentState":
        vector = np.asarray(vector, dtype=float).reshape(STATE_DIM)
        return cls(
            position=vector[POSITION],
            velocity=vector[VELOCITY],
            bias=vector[BIAS]
        )


@dataclass(frozen=True)
class ExtentModel:
    """
    Elliptical body shape, constant up to rotation.

    The base shape matrix is E = diag(a_long², a_short²) * scale.
    """

    semi_axes: Tuple[float, float] = (0.3, 0.2)
    scale: float = EXTENT_SCALE

    def __post_init__(self):
        a_long, a_short = self.semi_axes
        if a_long < 0 or a_short < 0:
            raise ValueError(f"semi_axes must be nonnegative, got {self.semi_axes}")
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @property
    def base_shape(self) -> np.ndarray:
        a_long, a_short = self.semi_axes
        return np.diag([a_long ** 2, a_short ** 2]) * self.scale


@dataclass(frozen=True)
class Anchor:
    """Fixed radio node."""

    id: int
    position: Tuple[float, float]
    can_transmit_passive: bool = False

    def __post_init__(self):
        if not np.all(np.isfinite(self.position)):
            raise ValueError(f"anchor {self.id} position must be finite")

    @property
    def xy(self) -> np.ndarray:
        return np.asarray(self.position, dtype=float)


@dataclass(frozen=True)
class Channel:
    """
    Propagation channel a measurement list belongs to.

    Active channels have tx=None (the agent transmits); passive channels carry
    the transmitting anchor id.
    """

    rx: int
    tx: Optional[int] = None

    @property
    def is_active(self) -> bool:
        return self.tx is None


@dataclass(frozen=True)
class Measurement:
    """One extracted (distance, normalized amplitude) pair."""

    distance: float
    amplitude: float
    rx_anchor: int
    tx_anchor: Optional[int] = None  # None: transmitted by the agent
    # Ground-truth origin ("los", "scatter", "clutter"), for audits only.
    origin: str = "unknown"

    @property
    def channel(self) -> Channel:
        return Channel(rx=self.rx_anchor, tx=self.tx_anchor)


@dataclass
class MeasurementSet:
    """All measurements of one time step, grouped by channel."""

    time_index: int
    active: Dict[int, List[Measurement]] = field(default_factory=dict)
    passive: Dict[Tuple[int, int], List[Measurement]] = field(default_factory=dict)

    def active_count(self, rx: int) -> int:
        return len(self.active.get(rx, []))

    def passive_count(self, rx: int, tx: int) -> int:
        return len(self.passive.get((rx, tx), []))

    @property
    def total(self) -> int:
        return (
            sum(len(m) for m in self.active.values())
            + sum(len(m) for m in self.passive.values())
        )

    def channels(self):
        """Yield (channel, measurements) for every channel in the set."""
        for rx, measurements in self.active.items():
            yield Channel(rx=rx), measurements
        for (rx, tx), measurements in self.passive.items():
            yield Channel(rx=rx, tx=tx), measurements
