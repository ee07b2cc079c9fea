"""Exponential-family primitives.

A :class:`Family` bundles the cumulant function ``b``, the mean mapping
``bdot = db/dtheta`` and its inverse, the curvature ``bddot``, the variance
function ``v(mu) = bddot(bdot_inv(mu))``, the base-measure term ``c(y)``,
and the canonical link ``g = bdot_inv``.  The dispersion is fixed at 1
throughout, so the gamma family is the unit-shape (exponential) case with
canonical parameter ``theta = -1/mu``.

Out-of-domain inputs raise :class:`~hppglm.errors.DomainError` rather than
saturating: silent clamping would mask transform bugs in the samplers
built on top of these functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, gammaln, logit

from .errors import DataError, DomainError

__all__ = [
    "Family",
    "MeanDomain",
    "get_family",
    "FAMILY_KINDS",
    "cumulant",
    "mean_canonical_bijection",
    "variance_function",
    "log_likelihood",
]

FAMILY_KINDS = ("bernoulli", "poisson", "gamma", "normal")


@dataclass(frozen=True)
class MeanDomain:
    """Open interval of valid mean values for a family."""

    lower: float
    upper: float

    def contains(self, mu, strict: bool = True) -> bool:
        mu = np.asarray(mu, dtype=float)
        if strict:
            return bool(np.all(mu > self.lower) and np.all(mu < self.upper))
        return bool(np.all(mu >= self.lower) and np.all(mu <= self.upper))


_MEAN_DOMAINS = {
    "bernoulli": MeanDomain(0.0, 1.0),
    "poisson": MeanDomain(0.0, np.inf),
    "gamma": MeanDomain(0.0, np.inf),
    "normal": MeanDomain(-np.inf, np.inf),
}


@dataclass(frozen=True)
class Family:
    """One of the four supported one-parameter exponential families.

    The dispersion is fixed at 1; ``mean_domain`` is the open image of the
    canonical domain under ``bdot``.
    """

    kind: str
    dispersion: float = 1.0
    mean_domain: MeanDomain = field(init=False)

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise DomainError(f"unknown family kind {self.kind!r}")
        if self.dispersion != 1.0:
            raise DomainError("only unit dispersion is supported")
        object.__setattr__(self, "mean_domain", _MEAN_DOMAINS[self.kind])

    # -- canonical-parameter side ------------------------------------

    def check_canonical(self, theta) -> np.ndarray:
        """Validate theta against the canonical domain and return it as ndarray."""
        theta = np.asarray(theta, dtype=float)
        if not np.all(np.isfinite(theta)):
            raise DomainError(f"non-finite canonical parameter for {self.kind}")
        if self.kind == "gamma" and not np.all(theta < 0):
            raise DomainError("gamma family requires theta < 0")
        return theta

    def cumulant(self, theta):
        """b(theta), elementwise."""
        theta = self.check_canonical(theta)
        if self.kind == "bernoulli":
            return np.logaddexp(0.0, theta)
        if self.kind == "poisson":
            return np.exp(theta)
        if self.kind == "gamma":
            return -np.log(-theta)
        return 0.5 * theta**2

    def to_mean(self, theta):
        """bdot(theta): canonical parameter -> mean."""
        theta = self.check_canonical(theta)
        if self.kind == "bernoulli":
            return expit(theta)
        if self.kind == "poisson":
            return np.exp(theta)
        if self.kind == "gamma":
            return -1.0 / theta
        return theta

    def cumulant_curvature(self, theta):
        """bddot(theta), elementwise; strictly positive on the domain."""
        theta = self.check_canonical(theta)
        if self.kind == "bernoulli":
            p = expit(theta)
            return p * (1.0 - p)
        if self.kind == "poisson":
            return np.exp(theta)
        if self.kind == "gamma":
            return 1.0 / theta**2
        return np.ones_like(theta)

    # -- mean side -----------------------------------------------------

    def check_mean(self, mu, strict: bool = True) -> np.ndarray:
        mu = np.asarray(mu, dtype=float)
        if not np.all(np.isfinite(mu)):
            raise DomainError(f"non-finite mean value for {self.kind}")
        if not self.mean_domain.contains(mu, strict=strict):
            bound = "interior of" if strict else ""
            raise DomainError(
                f"mean value outside {bound} ({self.mean_domain.lower}, "
                f"{self.mean_domain.upper}) for {self.kind}"
            )
        return mu

    def to_canonical(self, mu):
        """bdot_inv(mu): mean -> canonical parameter."""
        mu = self.check_mean(mu)
        if self.kind == "bernoulli":
            return logit(mu)
        if self.kind == "poisson":
            return np.log(mu)
        if self.kind == "gamma":
            return -1.0 / mu
        return mu

    def variance(self, mu):
        """v(mu) = bddot(bdot_inv(mu))."""
        mu = self.check_mean(mu)
        if self.kind == "bernoulli":
            return mu * (1.0 - mu)
        if self.kind == "poisson":
            return mu
        if self.kind == "gamma":
            return mu**2
        return np.ones_like(mu)

    def variance_deriv(self, mu):
        """dv/dmu, used by analytic gradients of the hyperprior density."""
        mu = self.check_mean(mu)
        if self.kind == "bernoulli":
            return 1.0 - 2.0 * mu
        if self.kind == "poisson":
            return np.ones_like(mu)
        if self.kind == "gamma":
            return 2.0 * mu
        return np.zeros_like(mu)

    # -- canonical link --------------------------------------------------

    def link(self, mu):
        """Canonical link g(mu) = bdot_inv(mu)."""
        return self.to_canonical(mu)

    def linkinv(self, eta):
        """g_inv(eta); identical to to_mean under the canonical link."""
        return self.to_mean(eta)

    def link_deriv(self, mu):
        """dg/dmu = 1 / v(mu) for the canonical link."""
        return 1.0 / self.variance(mu)

    # -- data side ---------------------------------------------------------

    def check_support(self, y) -> np.ndarray:
        """Validate observed responses against the family support."""
        y = np.asarray(y, dtype=float)
        if not np.all(np.isfinite(y)):
            raise DataError(f"non-finite response for {self.kind}")
        if self.kind == "bernoulli":
            if not np.all((y == 0.0) | (y == 1.0)):
                raise DataError("bernoulli responses must be 0 or 1")
        elif self.kind == "poisson":
            if not np.all((y >= 0.0) & (y == np.floor(y))):
                raise DataError("poisson responses must be nonnegative integers")
        elif self.kind == "gamma":
            if not np.all(y > 0.0):
                raise DataError("gamma responses must be positive")
        return y

    def log_base_measure(self, y):
        """c(y; 1), elementwise, so log-likelihoods are proper log densities."""
        y = np.asarray(y, dtype=float)
        if self.kind == "bernoulli" or self.kind == "gamma":
            return np.zeros_like(y)
        if self.kind == "poisson":
            return -gammaln(y + 1.0)
        return -0.5 * y**2 - 0.5 * np.log(2.0 * np.pi)

    def log_likelihood(self, y, eta) -> float:
        """Joint log density of y at linear predictor eta (canonical link)."""
        y = self.check_support(y)
        eta = np.asarray(eta, dtype=float)
        if y.shape != eta.shape:
            raise DataError("response and linear predictor lengths differ")
        theta = self.check_canonical(eta)
        return float(
            np.sum(y * theta - self.cumulant(theta)) + np.sum(self.log_base_measure(y))
        )


_FAMILIES = {kind: Family(kind) for kind in FAMILY_KINDS}


def get_family(kind) -> Family:
    """Resolve a family from its name; passes Family instances through."""
    if isinstance(kind, Family):
        return kind
    try:
        return _FAMILIES[kind]
    except KeyError:
        raise DomainError(
            f"unknown family {kind!r}; expected one of {FAMILY_KINDS}"
        ) from None


# Functional aliases for the four primitive operations.


def cumulant(family, theta):
    return get_family(family).cumulant(theta)


def mean_canonical_bijection(family, value, direction: str):
    """Apply bdot (``to_mean``) or bdot_inv (``to_canonical``) to ``value``."""
    fam = get_family(family)
    if direction == "to_mean":
        return fam.to_mean(value)
    if direction == "to_canonical":
        return fam.to_canonical(value)
    raise DomainError(f"direction must be 'to_mean' or 'to_canonical', got {direction!r}")


def variance_function(family, mu):
    return get_family(family).variance(mu)


def log_likelihood(family, y, eta) -> float:
    return get_family(family).log_likelihood(y, eta)
