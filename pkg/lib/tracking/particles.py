"""
Weighted particle representation of the agent-state belief.
"""

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from lib.data.schemas import AgentState, POSITION, STATE_DIM


@dataclass
class ParticleEnsemble:
    """
    Particles with log-domain weights.

    Attributes:
        particles: States of shape (I, 6), rows [p, v, b]
        log_weights: Unnormalized log-weights (I,)
        orientations: Last valid body orientation per particle (I,)
    """

    particles: np.ndarray
    log_weights: np.ndarray
    orientations: np.ndarray

    def __post_init__(self):
        self.particles = np.asarray(self.particles, dtype=float)
        self.log_weights = np.asarray(self.log_weights, dtype=float)
        self.orientations = np.asarray(self.orientations, dtype=float)
        if self.particles.ndim != 2 or self.particles.shape[1] != STATE_DIM:
            raise ValueError(f"particles must have shape (I, {STATE_DIM}), got {self.particles.shape}")
        if self.count < 1:
            raise ValueError("ensemble must hold at least one particle")
        if self.log_weights.shape != (self.count,) or self.orientations.shape != (self.count,):
            raise ValueError("log_weights and orientations must have one entry per particle")

    @property
    def count(self) -> int:
        return self.particles.shape[0]

    @property
    def weights(self) -> np.ndarray:
        """Normalized weights."""
        return np.exp(self.log_weights - logsumexp(self.log_weights))

    @property
    def states(self) -> List[AgentState]:
        return [AgentState.from_vector(row) for row in self.particles]

    def normalized(self) -> "ParticleEnsemble":
        return replace(self, log_weights=self.log_weights - logsumexp(self.log_weights))

    def effective_sample_size(self) -> float:
        """ESS = 1 / sum(w^2), in [1, I]."""
        weights = self.weights
        return float(np.clip(1.0 / np.sum(weights ** 2), 1.0, self.count))

    def position_spread(self) -> float:
        """sqrt of the trace of the weighted position covariance."""
        weights = self.weights
        positions = self.particles[:, POSITION]
        mean = weights @ positions
        deviation = positions - mean
        return float(np.sqrt(np.sum(weights @ (deviation ** 2))))


def init_ensemble(
    mean: np.ndarray,
    covariance: np.ndarray,
    count: int,
    rng: np.random.Generator,
    orientation: float = 0.0
) -> ParticleEnsemble:
    """
    Draw an ensemble from a Gaussian prior with uniform weights.

    Args:
        mean: Prior mean, 6-vector [p, v, b] (or AgentState)
        covariance: Prior covariance (6x6, PSD)
        count: Number of particles I
        rng: Random generator
        orientation: Initial orientation held by slow particles

    Returns:
        Ensemble with weights 1/I
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    if isinstance(mean, AgentState):
        mean = mean.as_vector()
    particles = rng.multivariate_normal(
        np.asarray(mean, dtype=float), np.asarray(covariance, dtype=float), size=count, method="eigh"
    )
    return ParticleEnsemble(
        particles=particles,
        log_weights=np.full(count, -np.log(count)),
        orientations=np.full(count, orientation)
    )


def systematic_resample(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    Systematic resampling indices.

    Args:
        weights: Normalized weights (I,)
        rng: Random generator

    Returns:
        Indices (I,) drawn proportionally to weights
    """
    count = len(weights)
    positions = (rng.random() + np.arange(count)) / count
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    return np.searchsorted(cumulative, positions, side="right")


def weighted_moments(ensemble: ParticleEnsemble) -> Tuple[np.ndarray, np.ndarray]:
    """Weighted mean (6,) and covariance (6, 6) of the particles."""
    weights = ensemble.weights
    mean = weights @ ensemble.particles
    deviation = ensemble.particles - mean
    covariance = (deviation * weights[:, None]).T @ deviation
    return mean, 0.5 * (covariance + covariance.T)


def kernel_bandwidth(count: int, dim: int = STATE_DIM) -> float:
    """Optimal Gaussian-kernel bandwidth for `count` particles in `dim` dimensions."""
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    return float((4.0 / (dim + 2)) ** (1.0 / (dim + 4)) * count ** (-1.0 / (dim + 4)))


def covariance_factor(covariance: np.ndarray) -> np.ndarray:
    """Factor L with L @ L.T equal to a PSD matrix; negative eigenvalues are clipped."""
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    return eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))


def regularize(
    particles: np.ndarray,
    mean: np.ndarray,
    covariance: np.ndarray,
    bandwidth: float,
    rng: np.random.Generator
) -> np.ndarray:
    """
    Move resampled particles with a Gaussian kernel shaped by the posterior.

    Each particle is shrunk toward the mean by a = sqrt(1 - h^2) and perturbed
    with covariance h^2 * covariance, so the first two moments of the
    ensemble are kept while its spread follows the posterior, including
    strongly correlated directions such as p + b.

    Args:
        particles: Resampled particles (I, 6)
        mean: Weighted mean before resampling (6,)
        covariance: Weighted covariance before resampling (6, 6)
        bandwidth: Kernel bandwidth h in [0, 1]
        rng: Random generator

    Returns:
        Regularized particles (I, 6)
    """
    if not 0.0 <= bandwidth <= 1.0:
        raise ValueError(f"bandwidth must be in [0, 1], got {bandwidth}")
    shrink = np.sqrt(1.0 - bandwidth ** 2)
    noise = rng.standard_normal(particles.shape) @ covariance_factor(covariance).T
    return shrink * particles + (1.0 - shrink) * mean + bandwidth * noise


def resample(
    ensemble: ParticleEnsemble,
    rng: np.random.Generator,
    jitter_std: Optional[Sequence[float]] = None,
    bandwidth: Optional[float] = None
) -> ParticleEnsemble:
    """
    Systematic resampling followed by optional regularization.

    Args:
        ensemble: Weighted ensemble
        rng: Random generator
        jitter_std: Per-component std of an additive jitter floor (None for none)
        bandwidth: Kernel bandwidth of the posterior-shaped regularization
            (None for none)

    Returns:
        Ensemble with uniform weights
    """
    indices = systematic_resample(ensemble.weights, rng)
    particles = ensemble.particles[indices]
    if bandwidth is not None and bandwidth > 0:
        mean, covariance = weighted_moments(ensemble)
        particles = regularize(particles, mean, covariance, bandwidth, rng)
    if jitter_std is not None:
        particles = particles + rng.normal(size=particles.shape) * np.asarray(jitter_std, dtype=float)
    return ParticleEnsemble(
        particles=particles,
        log_weights=np.full(ensemble.count, -np.log(ensemble.count)),
        orientations=ensemble.orientations[indices]
    )


def resample_if_needed(
    ensemble: ParticleEnsemble,
    threshold_fraction: float,
    rng: np.random.Generator,
    jitter_std: Optional[Sequence[float]] = None,
    bandwidth: Optional[float] = None
) -> ParticleEnsemble:
    """
    Resample when the effective sample size drops below threshold * I.

    Args:
        ensemble: Particle ensemble
        threshold_fraction: ESS threshold as a fraction of I, in (0, 1]
        rng: Random generator
        jitter_std: Per-component regularization std added after resampling
            (None for no jitter)
        bandwidth: Posterior-shaped kernel bandwidth (None for no kernel)

    Returns:
        The input ensemble, or a resampled one with uniform weights
    """
    if not 0.0 < threshold_fraction <= 1.0:
        raise ValueError(f"threshold_fraction must be in (0, 1], got {threshold_fraction}")
    if ensemble.effective_sample_size() >= threshold_fraction * ensemble.count:
        return ensemble
    return resample(ensemble, rng, jitter_std, bandwidth)


def mmse_estimate(ensemble: ParticleEnsemble) -> AgentState:
    """Posterior mean of the state (weighted particle mean)."""
    return AgentState.from_vector(ensemble.weights @ ensemble.particles)
