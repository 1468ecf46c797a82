import numpy as np
import pytest

from lib.tracking.motion import MotionModel


def test_matrices():
    model = MotionModel(dt=0.1, accel_std=3.0)
    np.testing.assert_allclose(model.transition[:2, 2:], 0.1 * np.eye(2))
    np.testing.assert_allclose(model.noise_gain, [[0.005, 0], [0, 0.005], [0.1, 0], [0, 0.1]])
    q = model.process_covariance
    np.testing.assert_allclose(q[0, 0], 9 * 0.1 ** 4 / 4)
    np.testing.assert_allclose(q[0, 2], 9 * 0.1 ** 3 / 2)
    np.testing.assert_allclose(q[2, 2], 9 * 0.1 ** 2)


def test_noise_free_propagation_is_constant_velocity(rng):
    model = MotionModel(dt=0.5, accel_std=0.0, bias_std=0.0)
    particles = np.array([[1.0, 2.0, 0.5, -1.0, 0.25, 0.1]])
    out = model.propagate(particles, rng)
    np.testing.assert_allclose(out, [[1.25, 1.5, 0.5, -1.0, 0.25, 0.1]])


def test_propagation_statistics(rng):
    model = MotionModel(dt=0.1, accel_std=3.0, bias_std=0.1)
    n = 200_000
    start = np.array([1.0, 1.0, 0.0, 0.5, 0.2, 0.1])
    out = model.propagate(np.tile(start, (n, 1)), rng)
    expected_mean = np.concatenate([model.transition @ start[:4], start[4:]])
    covariance = np.cov(out.T)
    np.testing.assert_allclose(out.mean(axis=0), expected_mean, atol=5 * np.sqrt(np.diag(covariance) / n))
    np.testing.assert_allclose(covariance[:4, :4], model.process_covariance, rtol=0.02, atol=1e-6)
    np.testing.assert_allclose(np.diag(covariance)[4:], 0.01, rtol=0.02)


def test_rejects_bad_dt():
    with pytest.raises(ValueError):
        MotionModel(dt=0.0)
