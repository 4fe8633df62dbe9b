import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bitrack import ConfigurationError, GaussianNoise, SensorBank, excitation_gain, observe_bit, observe_bits
from bitrack.channel import UnexcitableChannelWarning


def erf_cdf(x, sigma):
    """Oracle: closed-form normal cdf via math.erf."""
    return 0.5 * (1 + math.erf(x / (sigma * math.sqrt(2))))


@settings(max_examples=200, deadline=None)
@given(st.floats(-6, 6), st.floats(0.1, 20))
def test_cdf_matches_erf(x, sigma):
    assert math.isclose(GaussianNoise(sigma).cdf(x * sigma), erf_cdf(x * sigma, sigma), rel_tol=1e-12, abs_tol=1e-15)


@pytest.mark.parametrize("sigma", [0.5, 1.0, math.sqrt(10)])
def test_pdf_is_cdf_derivative(sigma):
    g = GaussianNoise(sigma)
    h = 1e-5
    for x in np.linspace(-3 * sigma, 3 * sigma, 13):
        fd = (g.cdf(x + h) - g.cdf(x - h)) / (2 * h)
        assert math.isclose(g.pdf(x), fd, rel_tol=1e-6, abs_tol=1e-12)


def test_cdf_tail_keeps_relative_accuracy():
    g = GaussianNoise(1.0)
    # Mills ratio asymptote pdf(x)/x for x -> -inf
    x = -30.0
    assert math.isclose(g.cdf(x), g.pdf(x) / 30 * (1 - 1 / 900 + 3 / 810000), rel_tol=1e-6)


def test_variance_and_degenerate():
    assert math.isclose(GaussianNoise.from_variance(10).sigma, math.sqrt(10))
    assert GaussianNoise.from_variance(10).variance == pytest.approx(10)
    d = GaussianNoise(0)
    assert d.degenerate and d.cdf(0.0) == 1.0 and d.cdf(-1e-9) == 0.0
    rng = np.random.default_rng(0)
    assert observe_bit(1.0, 0.0, d, rng) == 0 and observe_bit(-1.0, 0.0, d, rng) == 1
    with pytest.raises(ConfigurationError):
        GaussianNoise(-1)


def test_bit_frequency_matches_cdf():
    rng = np.random.default_rng(11)
    g = GaussianNoise(2.0)
    n = 200_000
    for x_j, B in [(0.0, 0.0), (1.0, -0.5), (-3.0, 1.0)]:
        z = rng.standard_normal(n)
        p_hat = observe_bits(np.full(n, x_j), B, g, z).mean()
        p = erf_cdf(B - x_j, 2.0)
        assert abs(p_hat - p) <= 4 * math.sqrt(p * (1 - p) / n)


def test_observe_bit_equals_vector_form():
    g = GaussianNoise(1.5)
    a, b = np.random.default_rng(5), np.random.default_rng(5)
    for x in [-2.0, 0.3, 4.0]:
        z = b.standard_normal()
        assert observe_bit(x, 0.5, g, a) == int(observe_bits(np.array([x]), 0.5, g, np.array([z]))[0])


def test_excitation_gain():
    g = GaussianNoise(math.sqrt(10))
    assert excitation_gain(g, 0.0, 50.0) == pytest.approx(g.pdf(50.0))
    assert excitation_gain(g, -2.0, 3.0) == pytest.approx(g.pdf(5.0))
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        assert excitation_gain(GaussianNoise(1.0), 0.0, 100.0) == 0.0
        assert any(issubclass(x.category, UnexcitableChannelWarning) for x in w)


def test_sensor_bank():
    sb = SensorBank.uniform(-1.5, 4)
    assert len(sb) == 4 and sb.B == 1.5
    with pytest.raises(ConfigurationError):
        SensorBank([0.0, np.inf])
