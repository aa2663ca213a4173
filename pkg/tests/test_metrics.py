import numpy as np
import pytest

from rissim.metrics import (
    DropMetrics,
    coupling_loss_db,
    empirical_cdf,
    noise_power_dbm,
    received_power,
    sinr,
    spectral_efficiency,
)


def test_received_power():
    assert received_power([1.0], 1.0) == 1.0
    assert received_power([1.0, 1j], 2.0) == pytest.approx(4.0)
    h = np.array([0.3 + 0.4j, -1.0])
    assert received_power(h * 10 ** (-7 / 20), 1.0) == pytest.approx(received_power(h, 1.0) * 10 ** (-0.7))
    with pytest.raises(ValueError):
        received_power([], 1.0)


def test_coupling_loss():
    assert coupling_loss_db(43.0, -57.0) == 100.0
    assert coupling_loss_db(43.0, 43.0) == 0.0
    assert coupling_loss_db(43.0 + 5, -57.0 + 5) == 100.0


def test_sinr():
    assert sinr(2.0, [], 1.0) == 2.0
    assert sinr(1.0, [1.0], 1.0) == 0.5
    assert sinr(1.0, [0.5, 0.01], 1.0) < sinr(1.0, [0.5], 1.0)
    with pytest.raises(ValueError):
        sinr(1.0, [], 0.0)


def test_spectral_efficiency():
    x = np.array([0.0, 1.0, 3.0])
    np.testing.assert_allclose(spectral_efficiency(x), [0.0, 1.0, 2.0])


def test_noise_floor():
    assert noise_power_dbm(10e6, 9.0) == pytest.approx(-95.0)


def test_cdf_examples():
    c = empirical_cdf([3, 1, 2])
    np.testing.assert_array_equal(c.sorted_values, [1, 2, 3])
    np.testing.assert_allclose(c.probabilities, [1 / 3, 2 / 3, 1])
    same = empirical_cdf([5.0] * 4)
    assert len(same) == 1 and same.probabilities[-1] == 1.0
    assert empirical_cdf(np.arange(1, 101)).percentile(50) == 50.5
    with pytest.raises(ValueError):
        empirical_cdf([])


def test_cdf_properties():
    c = empirical_cdf(np.random.default_rng(0).integers(0, 20, 200))
    assert np.all(np.diff(c.sorted_values) > 0)
    assert np.all(np.diff(c.probabilities) > 0)
    assert c.probabilities[-1] == 1.0


def test_drop_metrics_concat():
    def part(v):
        a = np.full(2, v)
        return DropMetrics(a, a, a, a, a.astype(int), a.astype(int))

    m = DropMetrics.concat([part(1.0), part(2.0)])
    assert len(m) == 4
    np.testing.assert_array_equal(m.sinr_db, [1, 1, 2, 2])
