"""
Particle-based sequential estimation of the extended agent.

Each step runs prediction through the motion model, the association-
marginalized weight update (split into tempered stages when a single update
would collapse the weights), MMSE extraction and, when the effective sample
size drops, systematic resampling with a kernel move shaped by the posterior
covariance.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from lib.data.schemas import AgentState, ExtentModel, MeasurementSet, POSITION, VELOCITY
from lib.likelihood.association import AssociationLikelihood, AssociationParams, EstimatorMode
from lib.likelihood.noise import NoiseModel
from lib.likelihood.unscented import UtConfig
from lib.models.geometry import oriented_extent, orientations_from_velocities
from lib.simulation.config import ScenarioConfig
from lib.tracking.motion import MotionModel
from lib.tracking.particles import (
    ParticleEnsemble,
    init_ensemble,
    kernel_bandwidth,
    mmse_estimate,
    resample,
    resample_if_needed,
)
from lib.utils.failure_modes import EnsembleCollapseError

logger = logging.getLogger(__name__)


@dataclass
class FilterConfig:
    """Tracker and likelihood tuning."""

    num_particles: int = 5000
    accel_std: float = 3.0
    bias_std: float = 0.1
    ess_threshold: float = 0.5
    jitter_std: Tuple[float, ...] = (0.01, 0.01, 0.01, 0.01, 0.005, 0.005)
    prior_position_std: float = 0.3
    prior_velocity_std: float = 0.3
    prior_bias_std: float = 0.3
    detection_probability: float = 0.95
    ut_alpha: float = 1.0
    ut_beta: float = 0.0
    ut_kappa: float = 1.0
    min_speed: float = 1e-3
    divergence_threshold_m: float = 1.0
    regularization: bool = True
    tempering_stages: int = 4

    def __post_init__(self):
        self.jitter_std = tuple(float(j) for j in self.jitter_std)
        if self.num_particles < 1:
            raise ValueError(f"num_particles must be at least 1, got {self.num_particles}")
        if not 0.0 < self.ess_threshold <= 1.0:
            raise ValueError(f"ess_threshold must be in (0, 1], got {self.ess_threshold}")
        if len(self.jitter_std) != 6 or min(self.jitter_std) < 0:
            raise ValueError(f"jitter_std must be six nonnegative values, got {self.jitter_std}")
        for name in ("accel_std", "bias_std", "prior_position_std", "prior_velocity_std", "prior_bias_std"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)}")
        if not 0.0 <= self.detection_probability <= 1.0:
            raise ValueError(f"detection_probability must be in [0, 1], got {self.detection_probability}")
        if self.divergence_threshold_m <= 0:
            raise ValueError(f"divergence_threshold_m must be positive, got {self.divergence_threshold_m}")
        if self.tempering_stages < 1:
            raise ValueError(f"tempering_stages must be at least 1, got {self.tempering_stages}")
        UtConfig(alpha=self.ut_alpha, beta=self.ut_beta, kappa=self.ut_kappa)

    @property
    def ut(self) -> UtConfig:
        return UtConfig(alpha=self.ut_alpha, beta=self.ut_beta, kappa=self.ut_kappa)

    @property
    def bandwidth(self) -> Optional[float]:
        """Bandwidth of the posterior-shaped resampling kernel, None when disabled."""
        return kernel_bandwidth(self.num_particles) if self.regularization else None

    def prior_covariance(self) -> np.ndarray:
        return np.diag(
            [self.prior_position_std ** 2] * 2
            + [self.prior_velocity_std ** 2] * 2
            + [self.prior_bias_std ** 2] * 2
        )

    def prior_mean(self, initial: AgentState) -> np.ndarray:
        """Centered on the initial position and velocity; bias prior at zero."""
        return np.concatenate([initial.position, initial.velocity, np.zeros(2)])


@dataclass
class TrackerOutput:
    """Per-step filter results."""

    estimates: np.ndarray          # (N, 6) MMSE states
    ess: np.ndarray                # (N,) effective sample size after the update
    position_spread: np.ndarray    # (N,) sqrt trace of posterior position covariance
    resampled: np.ndarray = field(default=None)  # (N,) resampling flags

    def __post_init__(self):
        if self.resampled is None:
            self.resampled = np.zeros(len(self.ess), dtype=bool)

    def __len__(self) -> int:
        return len(self.ess)

    @property
    def positions(self) -> np.ndarray:
        return self.estimates[:, POSITION]

    def estimate_at(self, step: int) -> AgentState:
        return AgentState.from_vector(self.estimates[step - 1])


def predict(ensemble: ParticleEnsemble, motion: MotionModel, rng: np.random.Generator) -> ParticleEnsemble:
    """Propagate particles through the motion model; weights unchanged."""
    return ParticleEnsemble(
        particles=motion.propagate(ensemble.particles, rng),
        log_weights=ensemble.log_weights,
        orientations=ensemble.orientations
    )


def _evaluate(
    ensemble: ParticleEnsemble,
    measurement_set: MeasurementSet,
    likelihood: AssociationLikelihood,
    extent_model: ExtentModel,
    mode: EstimatorMode,
    min_speed: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Per-particle orientations and step log-likelihoods (NaN mapped to -inf)."""
    orientations = orientations_from_velocities(
        ensemble.particles[:, VELOCITY], ensemble.orientations, min_speed
    )
    extents = oriented_extent(extent_model, orientations)
    log_likelihood = np.asarray(
        likelihood.step_log_likelihood(ensemble.particles, extents, measurement_set, mode), dtype=float
    )
    return orientations, np.where(np.isnan(log_likelihood), -np.inf, log_likelihood)


def update(
    ensemble: ParticleEnsemble,
    measurement_set: MeasurementSet,
    likelihood: AssociationLikelihood,
    extent_model: ExtentModel,
    mode: EstimatorMode,
    min_speed: float = 1e-3
) -> ParticleEnsemble:
    """
    Weight update with the association-marginalized step likelihood.

    Args:
        ensemble: Predicted ensemble
        measurement_set: Measurements of the step
        likelihood: Step likelihood evaluator
        extent_model: Body shape
        mode: Estimator variant
        min_speed: Speed below which a particle keeps its orientation

    Returns:
        Ensemble with normalized log-weights
    """
    orientations, log_likelihood = _evaluate(
        ensemble, measurement_set, likelihood, extent_model, mode, min_speed
    )
    log_weights = ensemble.log_weights + log_likelihood
    if not np.any(np.isfinite(log_weights)):
        raise EnsembleCollapseError(measurement_set.time_index)

    return ParticleEnsemble(
        particles=ensemble.particles,
        log_weights=log_weights,
        orientations=orientations
    ).normalized()


def _tempered_ess(log_weights: np.ndarray, log_likelihood: np.ndarray, exponent: float) -> float:
    tempered = log_weights + exponent * log_likelihood
    tempered = tempered - logsumexp(tempered)
    return float(np.exp(-logsumexp(2.0 * tempered)))


def tempering_exponent(
    log_weights: np.ndarray,
    log_likelihood: np.ndarray,
    remaining: float,
    target_ess: float,
    iterations: int = 40
) -> float:
    """
    Largest exponent in (0, remaining] whose tempered weights keep ESS >= target_ess.

    Returns the bisection lower bound, which may be 0 when even a vanishing
    exponent drops the ESS below the target.
    """
    if _tempered_ess(log_weights, log_likelihood, remaining) >= target_ess:
        return remaining
    low, high = 0.0, remaining
    for _ in range(iterations):
        middle = 0.5 * (low + high)
        if _tempered_ess(log_weights, log_likelihood, middle) >= target_ess:
            low = middle
        else:
            high = middle
    return low


def tempered_update(
    ensemble: ParticleEnsemble,
    measurement_set: MeasurementSet,
    likelihood: AssociationLikelihood,
    extent_model: ExtentModel,
    mode: EstimatorMode,
    rng: np.random.Generator,
    max_stages: int = 4,
    target_fraction: float = 0.5,
    bandwidth: Optional[float] = None,
    min_speed: float = 1e-3
) -> ParticleEnsemble:
    """
    Weight update applied in up to `max_stages` tempered stages.

    Each stage raises the step likelihood to the largest exponent that keeps
    the ESS at or above target_fraction times the ESS the stage starts from
    (an even share of the remaining exponent when no positive exponent does),
    then resamples and moves the particles with the posterior-shaped kernel.
    The last stage applies whatever exponent remains. The exponents sum to one, so the result
    targets the same posterior as `update`. With max_stages = 1 this is `update`.

    Args:
        ensemble: Predicted ensemble
        measurement_set: Measurements of the step
        likelihood: Step likelihood evaluator
        extent_model: Body shape
        mode: Estimator variant
        rng: Random generator for the intermediate resampling
        max_stages: Stage cap (>= 1)
        target_fraction: ESS kept per stage, as a fraction of the stage start ESS
        bandwidth: Kernel bandwidth of the intermediate moves (None for none)
        min_speed: Speed below which a particle keeps its orientation

    Returns:
        Ensemble with normalized log-weights
    """
    if max_stages < 1:
        raise ValueError(f"max_stages must be at least 1, got {max_stages}")

    remaining = 1.0
    for stage in range(max_stages):
        orientations, log_likelihood = _evaluate(
            ensemble, measurement_set, likelihood, extent_model, mode, min_speed
        )
        if not np.any(np.isfinite(ensemble.log_weights + log_likelihood)):
            raise EnsembleCollapseError(measurement_set.time_index)

        stages_left = max_stages - stage
        if stages_left == 1:
            exponent = remaining
        else:
            target_ess = target_fraction * ensemble.effective_sample_size()
            exponent = tempering_exponent(ensemble.log_weights, log_likelihood, remaining, target_ess)
            if exponent <= 0.0:
                exponent = remaining / stages_left
        ensemble = ParticleEnsemble(
            particles=ensemble.particles,
            log_weights=ensemble.log_weights + exponent * log_likelihood,
            orientations=orientations
        ).normalized()
        remaining -= exponent
        if remaining <= 1e-12:
            break
        ensemble = resample(ensemble, rng, bandwidth=bandwidth)
        logger.debug(f"step {measurement_set.time_index}: tempering stage {stage + 1}, exponent {exponent:.3g}")

    return ensemble


class ParticleTracker:
    """Sequential particle estimator of the extended agent."""

    def __init__(
        self,
        scenario: ScenarioConfig,
        config: FilterConfig,
        likelihood: Optional[AssociationLikelihood] = None,
        noise: Optional[NoiseModel] = None
    ):
        """
        Initialize tracker.

        Args:
            scenario: Scenario configuration (anchors, shape, rates)
            config: Filter configuration
            likelihood: Step likelihood (built from the scenario when None)
            noise: Distance noise model (derived from the pulse when None)
        """
        self.scenario = scenario
        self.config = config
        self.extent_model = scenario.extent_model
        self.motion = MotionModel(dt=scenario.dt, accel_std=config.accel_std, bias_std=config.bias_std)

        if likelihood is None:
            noise = noise or NoiseModel.from_pulse(scenario.rolloff, scenario.bandwidth_hz)
            likelihood = AssociationLikelihood(
                anchors=scenario.anchor_map,
                noise=noise,
                assoc=AssociationParams.from_max_distance(
                    scenario.mu_meas, scenario.mu_clutter, scenario.d_max
                ),
                ut=config.ut,
                detection_probability=config.detection_probability
            )
        self.likelihood = likelihood

    def initial_ensemble(
        self,
        initial: AgentState,
        initial_orientation: float,
        rng: np.random.Generator
    ) -> ParticleEnsemble:
        return init_ensemble(
            self.config.prior_mean(initial),
            self.config.prior_covariance(),
            self.config.num_particles,
            rng,
            orientation=initial_orientation
        )

    def run(
        self,
        record: Sequence[MeasurementSet],
        mode: EstimatorMode,
        initial: AgentState,
        initial_orientation: float,
        rng: np.random.Generator
    ) -> TrackerOutput:
        """
        Filter a full measurement record.

        Args:
            record: Measurement sets for steps 1..N
            mode: Estimator variant
            initial: State the prior is centered on
            initial_orientation: Orientation held by slow particles
            rng: Random generator of this run

        Returns:
            Tracker output for every step
        """
        mode = EstimatorMode.parse(mode)
        ensemble = self.initial_ensemble(initial, initial_orientation, rng)

        estimates: List[np.ndarray] = []
        ess: List[float] = []
        spread: List[float] = []
        resampled: List[bool] = []

        for measurement_set in record:
            ensemble = predict(ensemble, self.motion, rng)
            try:
                ensemble = tempered_update(
                    ensemble, measurement_set, self.likelihood, self.extent_model, mode, rng,
                    max_stages=self.config.tempering_stages,
                    target_fraction=self.config.ess_threshold,
                    bandwidth=self.config.bandwidth,
                    min_speed=self.config.min_speed
                )
            except EnsembleCollapseError as error:
                logger.warning(f"{mode.value}: ensemble collapse at step {error.step}")
                error.partial_output = _output(estimates, ess, spread, resampled)
                raise

            estimates.append(mmse_estimate(ensemble).as_vector())
            ess.append(ensemble.effective_sample_size())
            spread.append(ensemble.position_spread())

            resampled_ensemble = resample_if_needed(
                ensemble, self.config.ess_threshold, rng, self.config.jitter_std, self.config.bandwidth
            )
            resampled.append(resampled_ensemble is not ensemble)
            ensemble = resampled_ensemble
            logger.debug(
                f"{mode.value} step {measurement_set.time_index}: ESS={ess[-1]:.1f}"
                f"{' (resampled)' if resampled[-1] else ''}"
            )

        return _output(estimates, ess, spread, resampled)


def _output(estimates, ess, spread, resampled) -> TrackerOutput:
    return TrackerOutput(
        estimates=np.array(estimates).reshape(-1, 6),
        ess=np.array(ess, dtype=float),
        position_spread=np.array(spread, dtype=float),
        resampled=np.array(resampled, dtype=bool)
    )


def run_filter(
    record: Sequence[MeasurementSet],
    scenario: ScenarioConfig,
    config: FilterConfig,
    mode: EstimatorMode,
    initial: AgentState,
    initial_orientation: float,
    rng: np.random.Generator
) -> TrackerOutput:
    """Convenience wrapper: build a tracker and filter one record."""
    tracker = ParticleTracker(scenario, config)
    return tracker.run(record, mode, initial, initial_orientation, rng)
