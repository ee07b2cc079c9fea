import math

import numpy as np
import pytest
from scipy import stats

from hppglm import (
    DataError,
    DomainError,
    cumulant,
    get_family,
    log_likelihood,
    mean_canonical_bijection,
    variance_function,
)
from hppglm.families import FAMILY_KINDS

MU_RANGES = {
    "bernoulli": (0.01, 0.99),
    "poisson": (0.05, 50.0),
    "gamma": (0.05, 50.0),
    "normal": (-20.0, 20.0),
}


def random_mu(kind, rng, size):
    lo, hi = MU_RANGES[kind]
    return rng.uniform(lo, hi, size)


def test_cumulant_values():
    assert cumulant("poisson", 0.0) == pytest.approx(1.0)
    assert cumulant("bernoulli", 0.0) == pytest.approx(math.log(2.0))
    assert cumulant("normal", 3.0) == pytest.approx(4.5)
    assert cumulant("gamma", -2.0) == pytest.approx(-math.log(2.0))


def test_bijection_values():
    assert mean_canonical_bijection("bernoulli", 0.0, "to_mean") == pytest.approx(0.5)
    assert mean_canonical_bijection("poisson", 1.0, "to_canonical") == pytest.approx(0.0)
    assert mean_canonical_bijection("gamma", 2.0, "to_canonical") == pytest.approx(-0.5)


def test_variance_values():
    assert variance_function("bernoulli", 0.5) == pytest.approx(0.25)
    assert variance_function("normal", -7.0) == pytest.approx(1.0)
    assert variance_function("gamma", 3.0) == pytest.approx(9.0)


@pytest.mark.parametrize("kind", FAMILY_KINDS)
def test_bijection_round_trip(kind):
    fam = get_family(kind)
    rng = np.random.default_rng(5)
    mu = random_mu(kind, rng, 1000)
    back = fam.to_mean(fam.to_canonical(mu))
    assert np.max(np.abs(back - mu)) < 1e-12


@pytest.mark.parametrize("kind", FAMILY_KINDS)
def test_variance_is_mean_derivative(kind):
    fam = get_family(kind)
    rng = np.random.default_rng(7)
    mu = random_mu(kind, rng, 200)
    theta = fam.to_canonical(mu)
    h = 1e-6 * (1.0 + np.abs(theta))
    fd = (fam.to_mean(theta + h) - fam.to_mean(theta - h)) / (2.0 * h)
    v = fam.variance(mu)
    assert np.max(np.abs(fd - v) / np.abs(v)) < 1e-6


def test_log_likelihood_values():
    assert log_likelihood("bernoulli", [1.0], [0.0]) == pytest.approx(-math.log(2.0))
    assert log_likelihood("poisson", [0.0, 0.0], [0.0, 0.0]) == pytest.approx(-2.0)


def test_log_likelihood_matches_textbook_densities():
    rng = np.random.default_rng(11)

    y = rng.integers(0, 2, 25).astype(float)
    eta = rng.normal(0, 1.5, 25)
    want = np.sum(stats.bernoulli.logpmf(y, stats.logistic.cdf(eta)))
    assert log_likelihood("bernoulli", y, eta) == pytest.approx(want, abs=1e-10)

    y = rng.poisson(3.0, 25).astype(float)
    eta = rng.normal(0.5, 0.4, 25)
    want = np.sum(stats.poisson.logpmf(y, np.exp(eta)))
    assert log_likelihood("poisson", y, eta) == pytest.approx(want, abs=1e-10)

    y = rng.exponential(2.0, 25)
    theta = -rng.uniform(0.2, 3.0, 25)
    want = np.sum(stats.expon.logpdf(y, scale=-1.0 / theta))
    assert log_likelihood("gamma", y, theta) == pytest.approx(want, abs=1e-10)

    y = rng.normal(0, 1, 25)
    eta = rng.normal(0, 1, 25)
    want = np.sum(stats.norm.logpdf(y, loc=eta, scale=1.0))
    assert log_likelihood("normal", y, eta) == pytest.approx(want, abs=1e-10)


def test_normal_loglik_equals_gaussian_up_to_constant():
    rng = np.random.default_rng(3)
    y = rng.normal(0, 2, 10)
    eta = rng.normal(0, 1, 10)
    direct = -0.5 * np.sum((y - eta) ** 2) - 5.0 * math.log(2.0 * math.pi)
    assert log_likelihood("normal", y, eta) == pytest.approx(direct, abs=1e-10)


def test_domain_errors():
    with pytest.raises(DomainError):
        cumulant("gamma", 0.5)
    with pytest.raises(DomainError):
        mean_canonical_bijection("bernoulli", 1.0, "to_canonical")
    with pytest.raises(DomainError):
        mean_canonical_bijection("poisson", 0.0, "to_canonical")
    with pytest.raises(DomainError):
        variance_function("bernoulli", 0.0)
    with pytest.raises(DomainError):
        get_family("weibull")


def test_support_errors():
    with pytest.raises(DataError):
        log_likelihood("bernoulli", [0.5], [0.0])
    with pytest.raises(DataError):
        log_likelihood("poisson", [1.5], [0.0])
    with pytest.raises(DataError):
        log_likelihood("gamma", [-1.0], [-1.0])


def test_canonical_theta_link_is_identity():
    # theta(eta) = bdot_inv(g_inv(eta)) must be the identity map.
    fam = get_family("poisson")
    eta = np.linspace(-2, 2, 9)
    assert np.allclose(fam.to_canonical(fam.linkinv(eta)), eta, atol=1e-12)


def test_link_derivative_is_reciprocal_variance():
    for kind in FAMILY_KINDS:
        fam = get_family(kind)
        mu = random_mu(kind, np.random.default_rng(1), 50)
        assert np.allclose(fam.link_deriv(mu), 1.0 / fam.variance(mu), rtol=1e-12)
