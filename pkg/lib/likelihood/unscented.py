"""
Unscented transform of the scatter distribution through the range functions.

The scatter offset is zero-mean Gaussian with covariance X (the oriented
extent). Sigma points are expanded about the body center and pushed through
the active (monostatic) or passive (bistatic) range function; the weighted
variance of the transformed points is the extent-induced range spread.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class UtConfig:
    """Sigma-point scheme parameters."""

    alpha: float = 1.0
    beta: float = 0.0
    kappa: float = 1.0
    dimension: int = 2

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.dimension + self.lam <= 0:
            raise ValueError("alpha/kappa give a nonpositive sigma-point spread")

    @property
    def lam(self) -> float:
        return self.alpha ** 2 * (self.dimension + self.kappa) - self.dimension

    def weights(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Mean and covariance weights of the 2L + 1 sigma points.

        Returns:
            (wm, wc) tuple
        """
        n = self.dimension
        spread = n + self.lam
        wm = np.full(2 * n + 1, 1.0 / (2.0 * spread))
        wc = wm.copy()
        wm[0] = self.lam / spread
        wc[0] = self.lam / spread + (1.0 - self.alpha ** 2 + self.beta)
        return wm, wc

    def sigma_offsets(self, extent: np.ndarray) -> np.ndarray:
        """
        Zero-mean sigma points of N(0, X).

        Args:
            extent: Covariance(s) of shape (..., 2, 2), PSD

        Returns:
            Offsets of shape (..., 2L + 1, 2)
        """
        extent = np.asarray(extent, dtype=float)
        # Symmetric square root tolerates singular (flat or point) extents.
        eigvals, eigvecs = np.linalg.eigh(extent)
        root = (eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))[..., None, :]) @ np.swapaxes(eigvecs, -1, -2)
        columns = np.sqrt(self.dimension + self.lam) * np.swapaxes(root, -1, -2)
        zero = np.zeros(extent.shape[:-2] + (1, self.dimension))
        return np.concatenate([zero, columns, -columns], axis=-2)


def ut_scatter_variance(
    body_center: np.ndarray,
    extent: np.ndarray,
    rx_position: np.ndarray,
    tx_position: Optional[np.ndarray] = None,
    ut: Optional[UtConfig] = None
) -> np.ndarray:
    """
    Range spread induced by the body extent.

    Args:
        body_center: p + b, shape (..., 2)
        extent: Oriented extent X, shape (..., 2, 2)
        rx_position: Receiving anchor position
        tx_position: Transmitting anchor position for a passive channel,
            None for an active channel
        ut: Sigma-point scheme (default parameters when None)

    Returns:
        Variance in m^2, shape (...)
    """
    ut = ut or UtConfig()
    wm, wc = ut.weights()

    points = np.asarray(body_center, dtype=float)[..., None, :] + ut.sigma_offsets(extent)
    ranges = np.linalg.norm(points - np.asarray(rx_position, dtype=float), axis=-1)
    if tx_position is not None:
        ranges = ranges + np.linalg.norm(points - np.asarray(tx_position, dtype=float), axis=-1)

    mean = ranges @ wm
    variance = ((ranges - mean[..., None]) ** 2) @ wc
    return np.clip(variance, 0.0, None)
