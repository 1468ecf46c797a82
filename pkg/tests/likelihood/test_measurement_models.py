import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from lib.data.schemas import AgentState, Anchor, Measurement
from lib.likelihood.measurement_models import (
    active_model,
    active_scatter_lhf,
    los_lhf,
    passive_model,
    passive_scatter_lhf,
)
from lib.likelihood.noise import NoiseModel, distance_std
from lib.likelihood.unscented import ut_scatter_variance
from lib.simulation.measurements import sample_scatter_on_ellipse

NOISE = NoiseModel.from_pulse(0.6, 5e8)
ANCHOR = Anchor(1, (0.0, 0.0))
TX = Anchor(4, (6.0, 6.0), can_transmit_passive=True)
STATE = AgentState(position=[3.0, 4.0], velocity=[0.5, 0.0], bias=[0.25, 0.1])
EXTENT = np.diag([0.0225, 0.01])


def test_los_peak_value():
    z = Measurement(distance=5.0, amplitude=20.0, rx_anchor=1)
    sigma = distance_std(20.0, NOISE)
    assert los_lhf(z, STATE, ANCHOR, NOISE) == pytest.approx(1.0 / (np.sqrt(2 * np.pi) * sigma))


def test_los_ignores_bias():
    z = Measurement(distance=5.01, amplitude=20.0, rx_anchor=1)
    other = AgentState(position=[3.0, 4.0], velocity=[0.0, 0.0], bias=[-1.0, 2.0])
    assert los_lhf(z, STATE, ANCHOR, NOISE) == pytest.approx(los_lhf(z, other, ANCHOR, NOISE))


def test_active_scatter_density():
    z = Measurement(distance=5.3, amplitude=5.0, rx_anchor=1)
    center = STATE.body_center
    mean = np.linalg.norm(center)
    variance = distance_std(5.0, NOISE) ** 2 + ut_scatter_variance(center, EXTENT, ANCHOR.xy)
    expected = norm.pdf(5.3, loc=mean, scale=np.sqrt(variance))
    assert active_scatter_lhf(z, STATE, EXTENT, ANCHOR, NOISE) == pytest.approx(expected)


def test_passive_scatter_density():
    z = Measurement(distance=8.5, amplitude=5.0, rx_anchor=1, tx_anchor=4)
    center = STATE.body_center
    mean = np.linalg.norm(center) + np.linalg.norm(center - TX.xy)
    variance = distance_std(5.0, NOISE) ** 2 + ut_scatter_variance(center, EXTENT, ANCHOR.xy, TX.xy)
    expected = norm.pdf(8.5, loc=mean, scale=np.sqrt(variance))
    assert passive_scatter_lhf(z, STATE, EXTENT, TX, ANCHOR, NOISE) == pytest.approx(expected)
    assert passive_model(z, STATE, EXTENT, TX, ANCHOR, NOISE) == pytest.approx(expected)


def test_active_model_is_sum():
    z = Measurement(distance=5.2, amplitude=5.0, rx_anchor=1)
    total = los_lhf(z, STATE, ANCHOR, NOISE) + active_scatter_lhf(z, STATE, EXTENT, ANCHOR, NOISE)
    assert active_model(z, STATE, EXTENT, ANCHOR, NOISE) == pytest.approx(total)


def test_particle_and_list_shapes(rng):
    particles = np.tile(STATE.as_vector(), (6, 1)) + rng.normal(0, 0.05, size=(6, 6))
    extents = np.broadcast_to(EXTENT, (6, 2, 2))
    zs = [Measurement(distance=d, amplitude=5.0, rx_anchor=1) for d in (5.0, 5.2, 5.4)]
    assert active_model(zs[0], particles, extents, ANCHOR, NOISE).shape == (6,)
    values = active_model(zs, particles, extents, ANCHOR, NOISE)
    assert values.shape == (6, 3)
    single = active_model(zs[1], AgentState.from_vector(particles[2]), EXTENT, ANCHOR, NOISE)
    assert values[2, 1] == pytest.approx(single)


# Far-field geometry: body center at the origin, anchors about 1 km away.
FAR_STATE = AgentState(position=[-0.25, -0.1], velocity=[0.5, 0.0], bias=[0.25, 0.1])
FAR_RX = Anchor(2, (1000.0, 0.0))
FAR_TX = Anchor(3, (2000.0, 0.0), can_transmit_passive=True)


def _integral(density, mean, std):
    value, _ = quad(density, mean - 12 * std, mean + 12 * std, points=[mean], epsabs=1e-12, limit=200)
    return value


@pytest.mark.parametrize("amplitude", [1.0, 5.0, 30.0])
def test_densities_integrate_to_one(amplitude):
    sigma = distance_std(amplitude, NOISE)
    center = STATE.body_center

    def measurement(d, tx=None):
        return Measurement(distance=d, amplitude=amplitude, rx_anchor=1, tx_anchor=tx)

    los = _integral(lambda d: los_lhf(measurement(d), STATE, ANCHOR, NOISE), 5.0, sigma)
    assert los == pytest.approx(1.0, abs=1e-6)

    active_std = np.sqrt(sigma ** 2 + ut_scatter_variance(center, EXTENT, ANCHOR.xy))
    active = _integral(
        lambda d: active_scatter_lhf(measurement(d), STATE, EXTENT, ANCHOR, NOISE),
        np.linalg.norm(center), active_std
    )
    assert active == pytest.approx(1.0, abs=1e-6)

    passive_std = np.sqrt(sigma ** 2 + ut_scatter_variance(center, EXTENT, ANCHOR.xy, TX.xy))
    passive = _integral(
        lambda d: passive_scatter_lhf(measurement(d, 4), STATE, EXTENT, TX, ANCHOR, NOISE),
        np.linalg.norm(center) + np.linalg.norm(center - TX.xy), passive_std
    )
    assert passive == pytest.approx(1.0, abs=1e-6)


def _grid_error(ranges, density, mean, std, bins=200):
    """Total-variation distance between sampled ranges and a density on a +-5 std grid."""
    edges = mean + std * np.linspace(-5.0, 5.0, bins + 1)
    counts, _ = np.histogram(ranges, bins=edges)
    centers = 0.5 * (edges[1:] + edges[:-1])
    model = density(centers) * np.diff(edges)
    empirical = counts / len(ranges)
    return 0.5 * (np.sum(np.abs(empirical - model)) + (1.0 - empirical.sum()))


def _active_far(amplitude):
    def density(centers):
        zs = [Measurement(distance=d, amplitude=amplitude, rx_anchor=2) for d in centers]
        return active_scatter_lhf(zs, FAR_STATE, EXTENT, FAR_RX, NOISE)
    return density


def test_active_scatter_matches_sampled_convolution(rng):
    amplitude = 5.0
    sigma = distance_std(amplitude, NOISE)
    offsets = rng.multivariate_normal(np.zeros(2), EXTENT, size=1_000_000)
    ranges = np.linalg.norm(offsets - FAR_RX.xy, axis=1) + rng.normal(0.0, sigma, len(offsets))
    std = np.sqrt(sigma ** 2 + EXTENT[0, 0])
    assert _grid_error(ranges, _active_far(amplitude), 1000.0, std) < 0.02


def test_passive_scatter_matches_sampled_convolution(rng):
    amplitude = 5.0
    sigma = distance_std(amplitude, NOISE)
    offsets = rng.multivariate_normal(np.zeros(2), EXTENT, size=1_000_000)
    ranges = (
        np.linalg.norm(offsets - FAR_RX.xy, axis=1)
        + np.linalg.norm(offsets - FAR_TX.xy, axis=1)
        + rng.normal(0.0, sigma, len(offsets))
    )

    def density(centers):
        zs = [Measurement(distance=d, amplitude=amplitude, rx_anchor=2, tx_anchor=3) for d in centers]
        return passive_scatter_lhf(zs, FAR_STATE, EXTENT, FAR_TX, FAR_RX, NOISE)

    std = np.sqrt(sigma ** 2 + 4 * EXTENT[0, 0])
    assert _grid_error(ranges, density, 3000.0, std) < 0.02


def test_gaussian_scatter_shape_against_uniform_ellipse(rng):
    # Scatterers fill the ellipse uniformly; its range projection is a
    # semicircle law, which the Gaussian only matches once noise dominates.
    offsets = sample_scatter_on_ellipse(EXTENT, rng, size=1_000_000)
    errors = {}
    for amplitude in (2.0, 30.0):
        sigma = distance_std(amplitude, NOISE)
        ranges = np.linalg.norm(offsets - FAR_RX.xy, axis=1) + rng.normal(0.0, sigma, len(offsets))
        std = np.sqrt(sigma ** 2 + EXTENT[0, 0])
        errors[amplitude] = _grid_error(ranges, _active_far(amplitude), 1000.0, std)
    assert errors[30.0] < 0.15
    assert errors[2.0] < errors[30.0]


def test_active_model_is_bimodal_for_offset_body():
    # Bias along the anchor direction separates the LOS and scatter modes by 0.8 m.
    state = AgentState(position=[3.0, 4.0], velocity=[0.5, 0.0], bias=[0.48, 0.64])
    grid = np.arange(4.0, 7.0, 0.001)
    zs = [Measurement(distance=d, amplitude=5.0, rx_anchor=1) for d in grid]
    values = active_model(zs, state, EXTENT, ANCHOR, NOISE)
    peaks = np.flatnonzero((values[1:-1] > values[:-2]) & (values[1:-1] > values[2:])) + 1
    assert len(peaks) == 2
    assert grid[peaks[0]] == pytest.approx(5.0, abs=0.005)
    assert grid[peaks[1]] == pytest.approx(5.8, abs=0.02)


def test_passive_density_symmetric_in_anchor_roles():
    z = Measurement(distance=8.5, amplitude=5.0, rx_anchor=1, tx_anchor=4)
    forward = passive_scatter_lhf(z, STATE, EXTENT, TX, ANCHOR, NOISE)
    swapped = passive_scatter_lhf(z, STATE, EXTENT, ANCHOR, TX, NOISE)
    assert forward == pytest.approx(swapped, rel=1e-12)
