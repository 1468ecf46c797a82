import numpy as np
import pytest

from lib.tracking.particles import (
    ParticleEnsemble,
    init_ensemble,
    kernel_bandwidth,
    mmse_estimate,
    regularize,
    resample,
    resample_if_needed,
    systematic_resample,
    weighted_moments,
)


def _ensemble(weights, rng):
    weights = np.asarray(weights, dtype=float)
    return ParticleEnsemble(
        particles=rng.normal(size=(len(weights), 6)),
        log_weights=np.log(weights),
        orientations=np.zeros(len(weights)),
    )


def test_uniform_ess(rng):
    ensemble = _ensemble(np.full(100, 0.01), rng)
    assert ensemble.effective_sample_size() == pytest.approx(100.0)


def test_degenerate_ess(rng):
    weights = np.full(10, 1e-300)
    weights[3] = 1.0
    assert _ensemble(weights, rng).effective_sample_size() == pytest.approx(1.0)


def test_weights_normalized_from_log_domain(rng):
    ensemble = ParticleEnsemble(
        particles=rng.normal(size=(3, 6)),
        log_weights=np.array([-1000.0, -1000.0, -1000.0 + np.log(2.0)]),
        orientations=np.zeros(3),
    )
    np.testing.assert_allclose(ensemble.weights, [0.25, 0.25, 0.5])


def test_shape_validation(rng):
    with pytest.raises(ValueError):
        ParticleEnsemble(particles=np.zeros((3, 4)), log_weights=np.zeros(3), orientations=np.zeros(3))
    with pytest.raises(ValueError):
        ParticleEnsemble(particles=np.zeros((3, 6)), log_weights=np.zeros(2), orientations=np.zeros(3))


def test_systematic_counts_are_balanced(rng):
    weights = rng.dirichlet(np.ones(50))
    indices = systematic_resample(weights, rng)
    counts = np.bincount(indices, minlength=50)
    assert counts.sum() == 50
    assert np.all(np.abs(counts - 50 * weights) < 1.0 + 1e-9)


def test_no_resample_above_threshold(rng):
    ensemble = _ensemble(np.full(20, 0.05), rng)
    assert resample_if_needed(ensemble, 0.5, rng) is ensemble


def test_resample_below_threshold(rng):
    weights = np.full(20, 1e-6)
    weights[0] = 1.0
    ensemble = _ensemble(weights / weights.sum(), rng)
    resampled = resample_if_needed(ensemble, 0.5, rng)
    assert resampled is not ensemble
    np.testing.assert_allclose(resampled.weights, 1 / 20)
    np.testing.assert_array_equal(resampled.particles, np.tile(ensemble.particles[0], (20, 1)))


def test_resample_threshold_validated(rng):
    with pytest.raises(ValueError):
        resample_if_needed(_ensemble(np.full(4, 0.25), rng), 0.0, rng)


def test_mmse_is_weighted_mean(rng):
    ensemble = _ensemble([0.2, 0.3, 0.5], rng)
    expected = np.array([0.2, 0.3, 0.5]) @ ensemble.particles
    np.testing.assert_allclose(mmse_estimate(ensemble).as_vector(), expected)


def test_init_ensemble_moments(rng):
    mean = np.array([1.0, 1.0, 0.0, 0.5, 0.0, 0.0])
    covariance = np.diag([0.09] * 6)
    ensemble = init_ensemble(mean, covariance, 50_000, rng, orientation=0.7)
    assert ensemble.count == 50_000
    np.testing.assert_allclose(ensemble.particles.mean(axis=0), mean, atol=5 * 0.3 / np.sqrt(50_000))
    np.testing.assert_allclose(ensemble.orientations, 0.7)
    assert ensemble.position_spread() == pytest.approx(np.sqrt(0.18), rel=0.02)


def _correlated_cloud(count, rng):
    # p_x and b_x anti-correlated so that p_x + b_x is tight.
    covariance = np.diag([0.09, 0.09, 0.09, 0.09, 0.09, 0.09])
    covariance[0, 4] = covariance[4, 0] = -0.99 * 0.09
    particles = rng.multivariate_normal(np.zeros(6), covariance, size=count, method="eigh")
    return ParticleEnsemble(particles=particles, log_weights=np.zeros(count), orientations=np.zeros(count))


def test_kernel_bandwidth_for_six_states():
    assert kernel_bandwidth(2000) == pytest.approx(0.4363, abs=1e-3)
    assert kernel_bandwidth(5000) < kernel_bandwidth(2000)
    with pytest.raises(ValueError):
        kernel_bandwidth(0)


def test_weighted_moments_match_numpy(rng):
    ensemble = _ensemble(rng.dirichlet(np.ones(40)), rng)
    mean, covariance = weighted_moments(ensemble)
    np.testing.assert_allclose(mean, ensemble.weights @ ensemble.particles)
    np.testing.assert_allclose(
        covariance, np.cov(ensemble.particles.T, aweights=ensemble.weights, bias=True), atol=1e-12
    )


def test_kernel_resample_keeps_correlated_spread(rng):
    ensemble = _correlated_cloud(50_000, rng)
    moved = resample(ensemble, rng, bandwidth=kernel_bandwidth(ensemble.count))

    combined = moved.particles[:, 0] + moved.particles[:, 4]
    assert np.std(combined) == pytest.approx(np.sqrt(0.0018), rel=0.05)
    assert np.std(moved.particles[:, 0]) == pytest.approx(0.3, rel=0.03)
    np.testing.assert_allclose(moved.particles.mean(axis=0), 0.0, atol=5 * 0.3 / np.sqrt(50_000) + 0.005)
    np.testing.assert_allclose(moved.weights, 1 / 50_000)


def test_kernel_resample_of_single_survivor_stays_put(rng):
    weights = np.full(30, 1e-300)
    weights[7] = 1.0
    ensemble = _ensemble(weights, rng)
    moved = resample_if_needed(ensemble, 0.5, rng, bandwidth=0.5)
    np.testing.assert_allclose(moved.particles, np.tile(ensemble.particles[7], (30, 1)), atol=1e-9)


def test_regularize_zero_bandwidth_is_identity(rng):
    particles = rng.normal(size=(10, 6))
    np.testing.assert_array_equal(regularize(particles, np.zeros(6), np.eye(6), 0.0, rng), particles)
    with pytest.raises(ValueError, match="bandwidth"):
        regularize(particles, np.zeros(6), np.eye(6), 1.5, rng)
