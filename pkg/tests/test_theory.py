import math

import numpy as np
import pytest

from rissim.theory import (
    RateInputs,
    rate_discrete_asymptotic,
    rate_ideal,
    rate_no_ris,
    sinc_factor,
    theory_table,
)


@pytest.mark.parametrize("d,s", [(1, 0.0), (2, 2 / math.pi), (4, 2 * math.sqrt(2) / math.pi), (16, 0.99359)])
def test_sinc_values(d, s):
    assert sinc_factor(d) == pytest.approx(s, abs=1e-5)


def test_sinc_monotone_and_bounded():
    vals = [sinc_factor(d) for d in range(1, 200)]
    assert all(0 <= v < 1 for v in vals)
    assert all(a < b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        sinc_factor(0)


def test_rate_examples():
    assert rate_ideal(RateInputs(1.0)) == pytest.approx(1.0)
    assert rate_ideal(RateInputs(1.0, np.array([0.4, 0.6]))) == pytest.approx(math.log2(5))
    assert rate_no_ris(0.0, 1.0, 1.0) == 0.0
    assert rate_no_ris(1.0, 3.0, 1.0) == pytest.approx(2.0)


def test_discrete_limits():
    mags = np.full(64, 0.02)
    one = RateInputs(0.7, mags, 2.0, 1.0, 1)
    assert rate_discrete_asymptotic(one, 64) == pytest.approx(rate_no_ris(0.7, 2.0, 1.0))
    big = RateInputs(0.7, mags, 2.0, 1.0, 10**6)
    assert rate_discrete_asymptotic(big, 64) == pytest.approx(rate_ideal(big), rel=1e-9)


def test_rate_ordering_over_levels():
    rng = np.random.default_rng(0)
    for _ in range(100):
        mags = np.abs(rng.standard_normal(32)) / 32
        direct = abs(rng.standard_normal())
        rates = [rate_no_ris(direct, 1.0, 0.1)]
        rates += [rate_discrete_asymptotic(RateInputs(direct, mags, 1.0, 0.1, 2**k), 32) for k in range(13)]
        rates.append(rate_ideal(RateInputs(direct, mags, 1.0, 0.1)))
        assert all(a <= b + 1e-15 for a, b in zip(rates, rates[1:]))


def test_rates_increase_with_snr_and_direct():
    mags = np.full(8, 0.1)
    for fn in (lambda p, h: rate_ideal(RateInputs(h, mags, p, 1.0)),
               lambda p, h: rate_discrete_asymptotic(RateInputs(h, mags, p, 1.0, 4), 8),
               lambda p, h: rate_no_ris(h, p, 1.0)):
        assert fn(2.0, 0.5) > fn(1.0, 0.5)
        assert fn(1.0, 0.6) > fn(1.0, 0.5)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        RateInputs(-1.0)
    with pytest.raises(ValueError):
        RateInputs(1.0, noise_power=0.0)
    with pytest.raises(ValueError):
        RateInputs(1.0, d_levels=0)


def test_table_rows():
    rows = theory_table([1, 2, 4, 16], RateInputs(1.0, np.full(4, 0.25)))
    assert [r[0] for r in rows] == [1, 2, 4, 16]
    np.testing.assert_allclose([r[1] for r in rows], [0, 0.6366, 0.9003, 0.9936], atol=5e-5)
