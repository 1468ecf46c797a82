import numpy as np
import pytest

from lib.data.schemas import AgentState, MeasurementSet
from lib.likelihood.association import EstimatorMode
from lib.simulation.amplitude import AmplitudeModel
from lib.simulation.config import ScenarioConfig
from lib.simulation.measurements import MeasurementGenerator
from lib.simulation.trajectory import build_trajectory
from lib.tracking.motion import MotionModel
from lib.tracking.particles import init_ensemble, kernel_bandwidth
from lib.tracking.tracker import (
    FilterConfig,
    ParticleTracker,
    tempered_update,
    tempering_exponent,
    update,
)
from lib.utils.failure_modes import EnsembleCollapseError


class GaussianPositionLikelihood:
    """Direct position observation y_n = p_n + N(0, r^2 I)."""

    def __init__(self, observations, std):
        self.observations = observations
        self.std = std

    def step_log_likelihood(self, particles, extents, measurement_set, mode):
        y = self.observations[measurement_set.time_index - 1]
        return -0.5 * np.sum((particles[:, :2] - y) ** 2, axis=1) / self.std ** 2


class CollapsingLikelihood:
    def __init__(self, at_step):
        self.at_step = at_step

    def step_log_likelihood(self, particles, extents, measurement_set, mode):
        value = -np.inf if measurement_set.time_index == self.at_step else 0.0
        return np.full(len(particles), value)


def _kalman(mean, covariance, observations, motion, std):
    transition = np.eye(6)
    transition[:4, :4] = motion.transition
    process = np.zeros((6, 6))
    process[:4, :4] = motion.process_covariance
    process[4:, 4:] = motion.bias_std ** 2 * np.eye(2)
    observation = np.hstack([np.eye(2), np.zeros((2, 4))])
    noise = std ** 2 * np.eye(2)

    means, covariances = [], []
    for y in observations:
        mean = transition @ mean
        covariance = transition @ covariance @ transition.T + process
        innovation = observation @ covariance @ observation.T + noise
        gain = covariance @ observation.T @ np.linalg.inv(innovation)
        mean = mean + gain @ (y - observation @ mean)
        covariance = (np.eye(6) - gain @ observation) @ covariance
        means.append(mean)
        covariances.append(covariance)
    return np.array(means), np.array(covariances)


def test_particle_filter_matches_kalman_filter():
    rng = np.random.default_rng(2024)
    scenario = ScenarioConfig()
    config = FilterConfig(
        num_particles=20_000, accel_std=1.0, bias_std=0.05, jitter_std=(0.0,) * 6,
        regularization=False, tempering_stages=1
    )
    initial = AgentState(position=[1.0, 1.0], velocity=[0.0, 0.5], bias=[0.0, 0.0])
    std = 0.2

    steps = 5
    truth = initial.position + np.outer(np.arange(1, steps + 1), [0.0, 0.05])
    observations = truth + rng.normal(0.0, std, size=truth.shape)

    tracker = ParticleTracker(scenario, config, likelihood=GaussianPositionLikelihood(observations, std))
    record = [MeasurementSet(time_index=n) for n in range(1, steps + 1)]
    output = tracker.run(record, EstimatorMode.AP_EOPDA, initial, np.pi / 2, rng)

    motion = MotionModel(dt=scenario.dt, accel_std=config.accel_std, bias_std=config.bias_std)
    means, covariances = _kalman(
        config.prior_mean(initial), config.prior_covariance(), observations, motion, std
    )
    for n in range(steps):
        position_variance = np.diag(covariances[n])[:2]
        tolerance = np.maximum(5.0 * np.sqrt(position_variance / output.ess[n]), 0.01)
        np.testing.assert_array_less(np.abs(output.positions[n] - means[n, :2]), tolerance)
        expected_spread = np.sqrt(position_variance.sum())
        assert output.position_spread[n] == pytest.approx(expected_spread, rel=0.15)


def test_collapse_carries_partial_output(rng):
    scenario = ScenarioConfig()
    config = FilterConfig(num_particles=100)
    tracker = ParticleTracker(scenario, config, likelihood=CollapsingLikelihood(at_step=3))
    record = [MeasurementSet(time_index=n) for n in range(1, 6)]
    initial = AgentState(position=[1.0, 1.0], velocity=[0.0, 0.5])
    with pytest.raises(EnsembleCollapseError) as info:
        tracker.run(record, "a-eopda", initial, np.pi / 2, rng)
    assert info.value.step == 3
    assert len(info.value.partial_output) == 2
    assert info.value.partial_output.estimates.shape == (2, 6)


@pytest.mark.parametrize("mode", list(EstimatorMode))
def test_runs_on_simulated_record(mode):
    scenario = ScenarioConfig(num_steps=15, olos_window=(5, 10))
    truth = build_trajectory(scenario)
    amplitude = AmplitudeModel.calibrated(scenario, truth)
    record = MeasurementGenerator(scenario, amplitude, np.random.default_rng(1)).generate_record(truth)

    config = FilterConfig(num_particles=300)
    output = ParticleTracker(scenario, config).run(
        record, mode, truth.initial_state, truth.initial_orientation, np.random.default_rng(2)
    )
    assert output.estimates.shape == (15, 6)
    assert np.all(np.isfinite(output.estimates))
    assert np.all((output.ess >= 1.0) & (output.ess <= 300))
    assert output.resampled.dtype == bool
    assert output.estimate_at(15).position.shape == (2,)


def test_filter_config_validation():
    with pytest.raises(ValueError, match="ess_threshold"):
        FilterConfig(ess_threshold=0.0)
    with pytest.raises(ValueError, match="jitter_std"):
        FilterConfig(jitter_std=(0.1, 0.1))
    with pytest.raises(ValueError):
        FilterConfig(ut_alpha=0.0)
    with pytest.raises(ValueError, match="tempering_stages"):
        FilterConfig(tempering_stages=0)
    assert FilterConfig(regularization=False).bandwidth is None
    assert FilterConfig(num_particles=2000).bandwidth == pytest.approx(kernel_bandwidth(2000))


def test_prior_centered_on_initial_with_zero_bias():
    initial = AgentState(position=[1.0, 2.0], velocity=[0.5, 0.0], bias=[0.25, 0.1])
    np.testing.assert_array_equal(FilterConfig().prior_mean(initial), [1.0, 2.0, 0.5, 0.0, 0.0, 0.0])


def test_regularized_tempered_filter_matches_kalman_filter():
    rng = np.random.default_rng(77)
    scenario = ScenarioConfig()
    config = FilterConfig(
        num_particles=20_000, accel_std=1.0, bias_std=0.05, jitter_std=(0.0,) * 6, tempering_stages=4
    )
    initial = AgentState(position=[1.0, 1.0], velocity=[0.0, 0.5], bias=[0.0, 0.0])
    std = 0.05

    steps = 5
    truth = initial.position + np.outer(np.arange(1, steps + 1), [0.0, 0.05])
    observations = truth + rng.normal(0.0, std, size=truth.shape)

    tracker = ParticleTracker(scenario, config, likelihood=GaussianPositionLikelihood(observations, std))
    record = [MeasurementSet(time_index=n) for n in range(1, steps + 1)]
    output = tracker.run(record, EstimatorMode.AP_EOPDA, initial, np.pi / 2, rng)

    motion = MotionModel(dt=scenario.dt, accel_std=config.accel_std, bias_std=config.bias_std)
    means, covariances = _kalman(
        config.prior_mean(initial), config.prior_covariance(), observations, motion, std
    )
    for n in range(steps):
        position_variance = np.diag(covariances[n])[:2]
        np.testing.assert_array_less(np.abs(output.positions[n] - means[n, :2]), 0.01)
        assert output.position_spread[n] == pytest.approx(np.sqrt(position_variance.sum()), rel=0.2)


def _sharp_step(rng, count=2000):
    scenario = ScenarioConfig()
    observation = np.array([[2.0, 3.0]])
    likelihood = GaussianPositionLikelihood(observation, 0.01)
    mean = np.array([2.0, 3.0, 0.0, 0.5, 0.0, 0.0])
    ensemble = init_ensemble(mean, np.diag([0.09] * 6), count, rng, orientation=np.pi / 2)
    return scenario, likelihood, ensemble, MeasurementSet(time_index=1)


def test_tempering_exponent_keeps_target_ess(rng):
    log_weights = np.full(1000, -np.log(1000))
    log_likelihood = -0.5 * (rng.normal(size=1000) / 0.05) ** 2

    exponent = tempering_exponent(log_weights, log_likelihood, 1.0, 500.0)
    assert 0.0 < exponent < 1.0

    def ess(value):
        tempered = np.exp(log_weights + value * log_likelihood)
        tempered /= tempered.sum()
        return 1.0 / np.sum(tempered ** 2)

    assert ess(exponent) >= 500.0 - 1e-6
    assert ess(min(1.0, exponent * 1.01 + 1e-9)) < 500.0
    assert tempering_exponent(log_weights, np.zeros(1000), 0.7, 500.0) == 0.7


def test_single_stage_tempering_equals_plain_update(rng):
    scenario, likelihood, ensemble, measurement_set = _sharp_step(rng, count=200)
    plain = update(ensemble, measurement_set, likelihood, scenario.extent_model, EstimatorMode.AP_EOPDA)
    staged = tempered_update(
        ensemble, measurement_set, likelihood, scenario.extent_model, EstimatorMode.AP_EOPDA, rng,
        max_stages=1
    )
    np.testing.assert_allclose(staged.log_weights, plain.log_weights)
    np.testing.assert_array_equal(staged.particles, plain.particles)


def test_tempered_update_recovers_sample_size(rng):
    scenario, likelihood, ensemble, measurement_set = _sharp_step(rng)
    plain = update(ensemble, measurement_set, likelihood, scenario.extent_model, EstimatorMode.AP_EOPDA)
    staged = tempered_update(
        ensemble, measurement_set, likelihood, scenario.extent_model, EstimatorMode.AP_EOPDA, rng,
        max_stages=4, bandwidth=kernel_bandwidth(ensemble.count)
    )
    assert staged.effective_sample_size() > 5 * plain.effective_sample_size()
    np.testing.assert_allclose(
        staged.weights @ staged.particles[:, :2], [2.0, 3.0], atol=0.005
    )


def test_tempered_update_raises_on_collapse(rng):
    scenario = ScenarioConfig()
    ensemble = init_ensemble(np.zeros(6), np.eye(6), 50, rng)
    with pytest.raises(EnsembleCollapseError):
        tempered_update(
            ensemble, MeasurementSet(time_index=2), CollapsingLikelihood(at_step=2),
            scenario.extent_model, EstimatorMode.A_EOPDA, rng, max_stages=3
        )
