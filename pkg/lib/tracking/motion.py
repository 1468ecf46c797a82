"""
Agent motion model.

Kinematic substate [p, v] follows the constant-velocity model driven by white
acceleration; the body-center bias follows a Gaussian random walk.
"""

from dataclasses import dataclass

import numpy as np

from lib.data.schemas import BIAS, KINEMATIC


@dataclass(frozen=True)
class MotionModel:
    """Constant velocity with stochastic acceleration, plus bias random walk."""

    dt: float = 0.1
    accel_std: float = 3.0
    bias_std: float = 0.1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.accel_std < 0 or self.bias_std < 0:
            raise ValueError("accel_std and bias_std must be nonnegative")

    @property
    def transition(self) -> np.ndarray:
        """A (4x4)."""
        eye = np.eye(2)
        return np.block([[eye, self.dt * eye], [np.zeros((2, 2)), eye]])

    @property
    def noise_gain(self) -> np.ndarray:
        """B (4x2)."""
        eye = np.eye(2)
        return np.vstack([0.5 * self.dt ** 2 * eye, self.dt * eye])

    @property
    def process_covariance(self) -> np.ndarray:
        """Q = sigma_a^2 B B^T of the kinematic substate."""
        gain = self.noise_gain
        return self.accel_std ** 2 * gain @ gain.T

    def propagate(self, particles: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """
        Draw x_n ~ f(x_n | x_{n-1}) for every row.

        Args:
            particles: States of shape (I, 6)
            rng: Random generator

        Returns:
            Propagated states (I, 6)
        """
        count = particles.shape[0]
        out = np.empty_like(particles)
        accel = rng.normal(0.0, 1.0, (count, 2)) * self.accel_std
        out[:, KINEMATIC] = particles[:, KINEMATIC] @ self.transition.T + accel @ self.noise_gain.T
        out[:, BIAS] = particles[:, BIAS] + rng.normal(0.0, 1.0, (count, 2)) * self.bias_std
        return out
