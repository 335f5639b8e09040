import math

import mpmath
import numpy as np
import pytest
from scipy.special import erfcx

from fracfem.core.exceptions import DomainError, UnsupportedDomainError
from fracfem.core.models import MlParams
from fracfem.core.special_functions import gamma, mittag_leffler, mittag_leffler_array, mittag_leffler_regions


def _ml_oracle(alpha: float, beta: float, z: float) -> float:
    # the largest Taylor term is about exp(|z|^(1/alpha)), so cancellation eats that many digits
    dps = 40 + int(abs(z) ** (1.0 / alpha) / 2.3)
    with mpmath.workdps(dps):
        zz = mpmath.mpf(z)
        a = mpmath.mpf(alpha)
        b = mpmath.mpf(beta)
        s = mpmath.mpf(0)
        k = 0
        while True:
            term = zz**k * mpmath.rgamma(a * k + b)
            s += term
            if k > 20 and abs(term) < mpmath.mpf(10) ** (-dps + 10):
                break
            k += 1
        return float(s)


def test_gamma_values():
    assert gamma(5) == pytest.approx(24.0, rel=1e-14)
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma(2.5) == pytest.approx(1.329340388179137, rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, float("nan"), float("inf")])
def test_gamma_rejects_non_positive_or_non_finite(x):
    with pytest.raises(DomainError):
        gamma(x)


def test_gamma_rejects_non_numbers():
    with pytest.raises(DomainError):
        gamma("2")


def test_unit_order_is_exponential():
    z = np.linspace(-50.0, 0.0, 501)
    got = mittag_leffler_array(MlParams(1.0, 1.0), z)
    assert np.max(np.abs(got - np.exp(z)) / np.exp(z)) <= 1e-10


def test_unit_order_beta_two():
    z = np.linspace(-60.0, -0.1, 300)
    got = mittag_leffler_array(MlParams(1.0, 2.0), z)
    expected = np.expm1(z) / z
    assert np.max(np.abs(got - expected) / np.abs(expected)) <= 1e-10


@pytest.mark.parametrize("alpha", [0.1, 0.25, 0.5, 0.75, 0.95, 1.0])
def test_value_at_origin_is_one(alpha):
    assert mittag_leffler(MlParams(alpha), 0.0) == 1.0


def test_half_order_matches_scaled_erfc():
    x = np.concatenate([np.linspace(0.0, 12.0, 121), np.geomspace(12.5, 1e4, 60)])
    got = mittag_leffler_array(MlParams(0.5, 1.0), -x)
    expected = erfcx(x)
    assert np.max(np.abs(got - expected) / expected) <= 1e-10


@pytest.mark.parametrize("alpha,beta", [(0.6, 1.0), (0.6, 0.6), (0.5, 1.0), (0.85, 1.0), (0.5, 1.7)])
@pytest.mark.parametrize("z", [-0.5, -3.0, -7.0, -15.0])
def test_against_extended_precision_series(alpha, beta, z):
    expected = _ml_oracle(alpha, beta, z)
    got = mittag_leffler(MlParams(alpha, beta), z)
    assert abs(got - expected) <= 1e-12 * max(1.0, abs(expected))


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_two_term_recurrence(alpha):
    z = -np.geomspace(1e-3, 1e4, 80)
    beta = 1.0
    lhs = mittag_leffler_array(MlParams(alpha, beta), z)
    shifted = z * mittag_leffler_array(MlParams(alpha, alpha + beta), z)
    rhs = shifted + 1.0 / gamma(beta)
    scale = np.maximum.reduce([np.abs(lhs), np.abs(shifted), np.full_like(z, 1.0 / gamma(beta))])
    assert np.max(np.abs(lhs - rhs) / scale) <= 1e-10


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9, 1.0])
def test_decay_bound(alpha):
    x = np.concatenate([[0.0], np.geomspace(1e-3, 1e8, 300)])
    e = mittag_leffler_array(MlParams(alpha), -x)
    c0 = e[0] * (1.0 + x[0])
    assert c0 == 1.0
    assert np.max(np.abs(e) * (1.0 + x)) <= 10.0


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75, 1.0])
def test_monotone_on_negative_axis(alpha):
    x = np.concatenate([[0.0], np.geomspace(1e-6, 1e6, 400)])
    e = mittag_leffler_array(MlParams(alpha), -x)
    assert np.all(np.diff(e) <= 1e-15)
    assert np.all(e >= 0.0)


def test_array_shape_is_kept():
    z = -np.arange(12, dtype=float).reshape(3, 4)
    out = mittag_leffler_array(MlParams(0.5), z)
    assert out.shape == (3, 4)
    assert out[0, 0] == 1.0


def test_positive_argument_is_unsupported():
    with pytest.raises(UnsupportedDomainError):
        mittag_leffler(MlParams(0.5), 0.1)


def test_non_finite_argument_is_rejected():
    with pytest.raises(DomainError):
        mittag_leffler_array(MlParams(0.5), np.array([-1.0, np.nan]))


@pytest.mark.parametrize("alpha,beta", [(0.0, 1.0), (1.5, 1.0), (0.5, 0.0), (0.5, -1.0)])
def test_invalid_parameters(alpha, beta):
    with pytest.raises(DomainError):
        MlParams(alpha, beta)


def test_region_counts_cover_every_argument():
    z = -np.array([0.0, 1.0, 3.0, 5.0, 20.0, 1e3])
    counts = mittag_leffler_regions(MlParams(0.5), z)
    assert sum(counts.values()) == z.size
    assert counts["taylor"] == 2
    assert counts["integral"] == 2
    assert counts["asymptotic"] == 2
    assert counts["exp"] == 0


def test_region_counts_for_exponential():
    counts = mittag_leffler_regions(MlParams(1.0, 1.0), -np.linspace(0.0, 100.0, 7))
    assert counts == {"exp": 7, "taylor": 0, "integral": 0, "asymptotic": 0}
