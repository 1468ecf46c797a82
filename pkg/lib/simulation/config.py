"""
Scenario configuration.

Defaults reproduce the published simulation: four anchors on a 6 m square,
passive transmitter at (6, 6), 190 steps of 100 ms, body-caused LOS blockage
during steps 80-129.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Tuple

import numpy as np

from lib.data.schemas import Anchor, ExtentModel, EXTENT_SCALE


def default_anchors() -> Tuple[Anchor, ...]:
    return (
        Anchor(id=1, position=(0.0, 0.0)),
        Anchor(id=2, position=(6.0, 0.0)),
        Anchor(id=3, position=(0.0, 6.0)),
        Anchor(id=4, position=(6.0, 6.0), can_transmit_passive=True),
    )


def default_waypoints() -> Tuple[Tuple[float, float], ...]:
    return ((1.0, 1.0), (1.0, 5.0), (5.0, 5.0), (5.0, 2.0))


@dataclass
class ScenarioConfig:
    """All simulation constants of the scenario."""

    anchors: Tuple[Anchor, ...] = field(default_factory=default_anchors)
    passive_tx_anchor_ids: Tuple[int, ...] = (4,)
    passive_include_self_pair: bool = False
    num_steps: int = 190
    dt: float = 0.1
    semi_axes: Tuple[float, float] = (0.3, 0.2)
    extent_scale: float = EXTENT_SCALE
    bias: Tuple[float, float] = (0.25, 0.1)
    olos_window: Tuple[int, int] = (80, 129)
    ref_amplitude_db: float = 40.0
    beta_active: float = 0.2
    beta_passive: float = 0.8
    passive_offset_db: float = 10.0
    gamma: float = 2.0
    mu_meas: float = 5.0
    mu_clutter: float = 10.0
    d_max: float = 30.0
    rolloff: float = 0.6
    bandwidth_hz: float = 5e8
    waypoints: Tuple[Tuple[float, float], ...] = field(default_factory=default_waypoints)
    speed: float = 0.5
    distance_noise: bool = True
    fading_std_db: float = 0.0

    def __post_init__(self):
        self.passive_tx_anchor_ids = tuple(int(a) for a in self.passive_tx_anchor_ids)
        # The transmit flag always mirrors passive_tx_anchor_ids.
        self.anchors = tuple(
            replace(a, can_transmit_passive=a.id in self.passive_tx_anchor_ids) for a in self.anchors
        )
        self.semi_axes = tuple(float(a) for a in self.semi_axes)
        self.bias = tuple(float(b) for b in self.bias)
        self.olos_window = tuple(int(n) for n in self.olos_window)
        self.waypoints = tuple(tuple(float(c) for c in w) for w in self.waypoints)
        self.validate()

    def validate(self):
        """Check invariants, raising ValueError naming the field."""
        if self.num_steps <= 0:
            raise ValueError(f"num_steps must be positive, got {self.num_steps}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.mu_meas < 0:
            raise ValueError(f"mu_meas must be nonnegative, got {self.mu_meas}")
        if self.mu_clutter < 0:
            raise ValueError(f"mu_clutter must be nonnegative, got {self.mu_clutter}")
        if self.d_max <= 0:
            raise ValueError(f"d_max must be positive, got {self.d_max}")
        if self.speed <= 0:
            raise ValueError(f"speed must be positive, got {self.speed}")
        if self.fading_std_db < 0:
            raise ValueError(f"fading_std_db must be nonnegative, got {self.fading_std_db}")
        if not 0.0 <= self.rolloff <= 1.0:
            raise ValueError(f"rolloff must be in [0, 1], got {self.rolloff}")
        if self.bandwidth_hz <= 0:
            raise ValueError(f"bandwidth_hz must be positive, got {self.bandwidth_hz}")
        if self.beta_active <= 0 or self.beta_passive <= 0:
            raise ValueError("beta_active and beta_passive must be positive")
        if len(self.semi_axes) != 2 or min(self.semi_axes) < 0:
            raise ValueError(f"semi_axes must be two nonnegative lengths, got {self.semi_axes}")
        if len(self.bias) != 2:
            raise ValueError(f"bias must be a 2-vector, got {self.bias}")

        start, end = self.olos_window
        if start > end + 1 or start < 1 or end > self.num_steps:
            raise ValueError(
                f"olos_window must lie in [1, {self.num_steps}], got {self.olos_window}"
            )

        ids = [a.id for a in self.anchors]
        if len(ids) == 0:
            raise ValueError("anchors must not be empty")
        if len(set(ids)) != len(ids):
            raise ValueError(f"anchors must have distinct ids, got {ids}")
        for tx in self.passive_tx_anchor_ids:
            if tx not in ids:
                raise ValueError(f"passive_tx_anchor_ids references unknown anchor {tx}")
        if len(self.waypoints) < 2:
            raise ValueError("waypoints must contain at least two points")

    @property
    def anchor_map(self) -> Dict[int, Anchor]:
        return {a.id: a for a in self.anchors}

    @property
    def extent_model(self) -> ExtentModel:
        return ExtentModel(semi_axes=self.semi_axes, scale=self.extent_scale)

    @property
    def passive_tx_anchor_id(self) -> int:
        """The primary passive transmitter."""
        return self.passive_tx_anchor_ids[0]

    def passive_pairs(self) -> List[Tuple[int, int]]:
        """(rx, tx) pairs receiving passive measurements."""
        pairs = []
        for tx in self.passive_tx_anchor_ids:
            for anchor in self.anchors:
                if anchor.id == tx and not self.passive_include_self_pair:
                    continue
                pairs.append((anchor.id, tx))
        return pairs

    def is_blocked(self, step: int) -> bool:
        """Whether the active LOS is obstructed at a 1-based step."""
        start, end = self.olos_window
        return start <= step <= end

    @property
    def waypoint_array(self) -> np.ndarray:
        return np.asarray(self.waypoints, dtype=float)
