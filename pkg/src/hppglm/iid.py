"""Intercept-only (i.i.d.) machinery.

Covers the conjugate prior for i.i.d. exponential-family data (the DY
prior), its hyperprior over the prior prediction ``m``, the exact
unnormalized posterior of ``m`` built from closed-form normalizing
constants, large-precision mixture approximations to that posterior, and
quadrature-based posterior moments.

Everything here is evaluated in log space; the normalizing constant
``Z(a, c) = int exp{c*theta - a*b(theta)} dtheta`` reduces to a beta
function (bernoulli), a gamma function (poisson and gamma families), or a
Gaussian integral (normal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats
from scipy.special import betaln, gammaln

from .errors import ApproximationUnavailableError, DomainError, PrecisionError
from .families import Family, get_family

__all__ = [
    "DyPrior",
    "Hyperprior",
    "StandardDensity",
    "MixtureApprox",
    "dy_update",
    "dy_log_kernel",
    "dy_log_normconst",
    "iid_power_prior_log_kernel",
    "hyperprior_standard_form",
    "hyper_log_pdf",
    "m_log_posterior",
    "limiting_m_posterior",
    "m_posterior_moments",
]


@dataclass(frozen=True)
class DyPrior:
    """Conjugate prior DY(theta | lam, m) with precision lam and prediction m."""

    family: Family
    lam: float
    m: float

    def __post_init__(self):
        fam = get_family(self.family)
        object.__setattr__(self, "family", fam)
        if not self.lam > 0:
            raise DomainError("DY precision lambda must be positive")
        fam.check_mean(self.m)


@dataclass(frozen=True)
class Hyperprior:
    """Hyperprior on the prediction m, with precision lambda0 and mean mu0."""

    family: Family
    lambda0: float
    mu0: float

    def __post_init__(self):
        fam = get_family(self.family)
        object.__setattr__(self, "family", fam)
        if not self.lambda0 > 0:
            raise DomainError("hyperprior precision lambda0 must be positive")
        fam.check_mean(self.mu0)


def dy_update(n: int, ybar: float, prior: DyPrior) -> DyPrior:
    """Posterior DY parameters after n observations with sample mean ybar.

    The updated prediction is the convex combination
    ``(n*ybar + lam*m) / (n + lam)``, which is also the posterior mean of
    the model mean ``mu``.
    """
    if n < 1:
        raise DomainError("dy_update requires n >= 1")
    prior.family.check_mean(ybar, strict=False)
    lam_new = prior.lam + n
    m_new = (n * ybar + prior.lam * prior.m) / lam_new
    return DyPrior(prior.family, lam_new, m_new)


def dy_log_kernel(family, theta, lam: float, m: float):
    """Unnormalized log DY density: lam * [theta*m - b(theta)]."""
    fam = get_family(family)
    theta = fam.check_canonical(theta)
    return lam * (theta * m - fam.cumulant(theta))


def iid_power_prior_log_kernel(family, theta, a0: float, ybar0: float):
    """i.i.d. power-prior log kernel with flat initial prior.

    With discounting a0 applied to the historical mean ybar0 this is, by
    construction, the DY log kernel with lam = a0 and m = ybar0.
    """
    if not 0 < a0:
        raise DomainError("a0 must be positive")
    fam = get_family(family)
    theta = fam.check_canonical(theta)
    return a0 * (theta * ybar0 - fam.cumulant(theta))


def dy_log_normconst(family, a: float, c: float) -> float:
    """log Z(a, c) with Z(a, c) = int_Theta exp{c*theta - a*b(theta)} dtheta.

    For the DY prior itself, a = lam and c = lam * m.  Raises
    :class:`DomainError` when the integral diverges for the given (a, c).
    """
    fam = get_family(family)
    kind = fam.kind
    if kind == "bernoulli":
        if not (c > 0 and a - c > 0):
            raise DomainError("bernoulli Z(a, c) requires 0 < c < a")
        val = betaln(c, a - c)
    elif kind == "poisson":
        if not (c > 0 and a > 0):
            raise DomainError("poisson Z(a, c) requires a > 0 and c > 0")
        val = gammaln(c) - c * math.log(a)
    elif kind == "gamma":
        if not (a > -1 and c > 0):
            raise DomainError("gamma-family Z(a, c) requires a > -1 and c > 0")
        val = gammaln(a + 1.0) - (a + 1.0) * math.log(c)
    else:
        if not a > 0:
            raise DomainError("normal Z(a, c) requires a > 0")
        val = 0.5 * math.log(2.0 * math.pi / a) + 0.5 * c * c / a
    if not np.isfinite(val):
        raise PrecisionError(f"log Z overflowed for a={a!r}, c={c!r}")
    return float(val)


# -- hyperprior ------------------------------------------------------------


@dataclass(frozen=True)
class StandardDensity:
    """A recognizable density: beta, gamma, inverse_gamma, or normal.

    ``params`` follow scipy conventions: (a, b) for beta, (shape, rate) for
    gamma, (shape, scale) for inverse_gamma, (mean, variance) for normal.
    """

    kind: str
    params: tuple

    def _frozen(self):
        if self.kind == "beta":
            return stats.beta(*self.params)
        if self.kind == "gamma":
            shape, rate = self.params
            return stats.gamma(shape, scale=1.0 / rate)
        if self.kind == "inverse_gamma":
            shape, scale = self.params
            return stats.invgamma(shape, scale=scale)
        if self.kind == "normal":
            mean, var = self.params
            return stats.norm(mean, math.sqrt(var))
        raise DomainError(f"unknown density kind {self.kind!r}")

    def is_proper(self) -> bool:
        return all(np.isfinite(self.params)) and (
            self.kind == "normal" and self.params[1] > 0
            or self.kind != "normal" and all(p > 0 for p in self.params)
        )

    def pdf(self, x):
        return self._frozen().pdf(x)

    def logpdf(self, x):
        return self._frozen().logpdf(x)

    def mean(self) -> float:
        return float(self._frozen().mean())

    def var(self) -> float:
        return float(self._frozen().var())

    def interval(self, level: float):
        lo, hi = self._frozen().interval(level)
        return float(lo), float(hi)


@dataclass(frozen=True)
class MixtureApprox:
    """Finite mixture of standard densities approximating a posterior."""

    weights: np.ndarray
    components: list = field(default_factory=list)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise DomainError("mixture weights must sum to 1")
        if np.any(w < 0):
            raise DomainError("mixture weights must be nonnegative")
        for comp in self.components:
            if not comp.is_proper():
                raise DomainError(f"improper mixture component {comp}")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for w, comp in zip(self.weights, self.components):
            out = out + w * comp.pdf(x)
        return out

    def mean(self) -> float:
        return float(sum(w * c.mean() for w, c in zip(self.weights, self.components)))


def hyperprior_standard_form(family, hp: Hyperprior) -> StandardDensity:
    """The hyperprior on m as a named density; each form has mean mu0."""
    fam = get_family(family)
    lam0, mu0 = hp.lambda0, hp.mu0
    if fam.kind == "bernoulli":
        return StandardDensity("beta", (lam0 * mu0, lam0 * (1.0 - mu0)))
    if fam.kind == "poisson":
        return StandardDensity("gamma", (lam0 * mu0, lam0))
    if fam.kind == "gamma":
        return StandardDensity("inverse_gamma", (lam0 + 1.0, lam0 * mu0))
    return StandardDensity("normal", (mu0, 1.0 / lam0))


def hyper_log_pdf(family, m, lambda0: float, mu0: float):
    """Unnormalized log hyperprior of m.

    On the canonical scale nu = bdot_inv(m) the kernel is
    ``lambda0 * [nu*mu0 - b(nu)]``; the change of variables contributes
    ``-log v(m)``.
    """
    fam = get_family(family)
    m = fam.check_mean(m)
    nu = fam.to_canonical(m)
    return lambda0 * (nu * mu0 - fam.cumulant(nu)) - np.log(fam.variance(m))


# -- exact posterior of m ----------------------------------------------------


def m_log_posterior(
    family, m: float, n: int, ybar: float, lam: float, hp: Hyperprior
) -> float:
    """Unnormalized log posterior density of the prediction m.

    log Z(lam + n, lam*m + n*ybar) - log Z(lam, lam*m) plus the log
    hyperprior.  Finite for m strictly inside the mean domain.
    """
    fam = get_family(family)
    fam.check_mean(m)
    fam.check_mean(ybar, strict=False)
    if n < 1 or lam <= 0:
        raise DomainError("m_log_posterior requires n >= 1 and lam > 0")
    if fam.kind == "bernoulli":
        # Z(n + lam, n*ybar + lam*m) needs both beta arguments positive,
        # which boundary ybar in {0, 1} still satisfies for interior m.
        pass
    ratio = dy_log_normconst(fam, lam + n, lam * m + n * ybar) - dy_log_normconst(
        fam, lam, lam * m
    )
    return float(ratio + hyper_log_pdf(fam, m, hp.lambda0, hp.mu0))


def limiting_m_posterior(
    family, n: int, ybar: float, lam: float, hp: Hyperprior
) -> MixtureApprox:
    """Large-lambda mixture approximation to the posterior of m.

    poisson: two gamma components sharing rate n + lambda0, the lead one
    with shape n*ybar + lambda0*mu0, mixed with weight
    ``gamma = 1 / (1 + (n*ybar)(n*ybar - 1) / (2*lam))``.

    bernoulli: four beta components with shapes built from
    ``a* = n*ybar + lambda0*mu0`` and ``b* = n*(1-ybar) + lambda0*(1-mu0)``,
    weighted by their lambda powers and beta normalizers.

    gamma family: a single inverse-gamma with shape n + lambda0 + 1 and
    scale n*ybar + lambda0*mu0.

    normal: the exact normal posterior, valid for every lam.
    """
    fam = get_family(family)
    fam.check_mean(ybar, strict=False)
    if n < 1 or lam <= 0:
        raise DomainError("limiting_m_posterior requires n >= 1 and lam > 0")
    lam0, mu0 = hp.lambda0, hp.mu0
    s = n * ybar  # total "successes" / count sum

    if fam.kind == "poisson":
        if not s > 1:
            raise ApproximationUnavailableError(
                "poisson approximation requires n*ybar > 1"
            )
        gam = 1.0 / (1.0 + (s * (s - 1.0) / 2.0) / lam)
        comps = [
            StandardDensity("gamma", (s + lam0 * mu0, n + lam0)),
            StandardDensity("gamma", (s + lam0 * mu0 - 1.0, n + lam0)),
        ]
        return MixtureApprox(np.array([gam, 1.0 - gam]), comps)

    if fam.kind == "bernoulli":
        if not 0.0 < ybar < 1.0:
            raise ApproximationUnavailableError(
                "bernoulli approximation requires 0 < ybar < 1"
            )
        f = n * (1.0 - ybar)  # total failures
        a_star = s + lam0 * mu0
        b_star = f + lam0 * (1.0 - mu0)
        shapes = [
            (a_star, b_star),
            (a_star, b_star - 1.0),
            (a_star - 1.0, b_star),
            (a_star - 1.0, b_star - 1.0),
        ]
        # Coefficients carry the lambda power of each expansion term and the
        # second-order factors; proper mixture weights also absorb each
        # component's beta normalizer.
        cs = 0.5 * s * (s - 1.0)
        cf = 0.5 * f * (f - 1.0)
        log_coef = np.array(
            [
                0.0,
                math.log(cf) - math.log(lam) if cf > 0 else -np.inf,
                math.log(cs) - math.log(lam) if cs > 0 else -np.inf,
                (math.log(cs) + math.log(cf) - 2.0 * math.log(lam))
                if cs > 0 and cf > 0
                else -np.inf,
            ]
        )
        log_w = log_coef + np.array([betaln(a, b) for a, b in shapes])
        log_w -= log_w.max()
        w = np.exp(log_w)
        w /= w.sum()
        keep = w > 0
        comps = [StandardDensity("beta", ab) for ab, k in zip(shapes, keep) if k]
        return MixtureApprox(w[keep], comps)

    if fam.kind == "gamma":
        return MixtureApprox(
            np.array([1.0]),
            [StandardDensity("inverse_gamma", (n + lam0 + 1.0, s + lam0 * mu0))],
        )

    # normal: conjugate for every lam, no approximation involved
    prec = lam0 + n / (1.0 + n / lam)
    mean = (lam0 * mu0 + s / (1.0 + n / lam)) / prec
    return MixtureApprox(np.array([1.0]), [StandardDensity("normal", (mean, 1.0 / prec))])


# -- quadrature moments -------------------------------------------------------


def _integration_support(family, n, ybar, lam, hp):
    """Bracket and interior peak of the posterior of m via a log-density scan.

    The bracket covers every point whose log density is within 80 of the
    maximum, so both the diffuse small-lam regime (hyperprior-like) and
    the concentrated large-lam regime are contained.
    """
    fam = get_family(family)
    scale = max(abs(hp.mu0), abs(ybar), 1.0)
    if fam.kind == "bernoulli":
        grid = np.linspace(1e-6, 1.0 - 1e-6, 1201)
    elif fam.kind == "normal":
        spread = 10.0 * math.sqrt(1.0 / hp.lambda0) + 3.0 * scale + 10.0
        center = (n * ybar + hp.lambda0 * hp.mu0) / (n + hp.lambda0)
        grid = np.linspace(center - spread, center + spread, 1201)
    else:
        grid = np.geomspace(scale * 1e-7, scale * 400.0, 1201)
    logs = np.array([m_log_posterior(fam, x, n, ybar, lam, hp) for x in grid])
    k = int(np.argmax(logs))
    if fam.kind == "bernoulli":
        return 0.0, 1.0, float(grid[k])
    keep = np.where(logs >= logs[k] - 80.0)[0]
    i0, i1 = max(keep[0] - 1, 0), min(keep[-1] + 1, grid.size - 1)
    return float(grid[i0]), float(grid[i1]), float(grid[k])


def m_posterior_moments(family, n: int, ybar: float, lam: float, hp: Hyperprior):
    """Posterior mean, sd, and log normalizer of m by adaptive quadrature."""
    fam = get_family(family)
    lo, hi, peak = _integration_support(fam, n, ybar, lam, hp)
    shift = m_log_posterior(fam, peak, n, ybar, lam, hp)

    def dens(x):
        return math.exp(m_log_posterior(fam, x, n, ybar, lam, hp) - shift)

    z0, _ = integrate.quad(dens, lo, hi, limit=400, points=[peak])
    m1, _ = integrate.quad(lambda x: x * dens(x), lo, hi, limit=400, points=[peak])
    m2, _ = integrate.quad(lambda x: x * x * dens(x), lo, hi, limit=400, points=[peak])
    mean = m1 / z0
    var = max(m2 / z0 - mean**2, 0.0)
    return float(mean), float(math.sqrt(var)), float(math.log(z0) + shift)
