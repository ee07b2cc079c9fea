"""Log-density kernels for regression priors and the joint posterior.

The conjugate (CI) prior kernel, the hierarchical hyperprior with
per-observation precisions, Laplace and exact-categorical normalizing
constants for the CI prior, the joint posterior of (beta, m), the power
prior, and the diagonal Gaussian power prior.  Analytic gradients
accompany every kernel so samplers and tests can verify them against
finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DataError,
    DomainError,
    FitError,
    SingularMatrixError,
    UnsupportedDesignError,
)
from .families import Family, get_family
from .iid import dy_log_normconst
from .irls import _eval_kernel, _newton_max, _start_beta, irls

__all__ = [
    "GlmData",
    "CiPrior",
    "HppHyper",
    "PowerPriorConfig",
    "GppConfig",
    "ci_log_kernel",
    "ci_log_kernel_grad",
    "laplace_log_normconst",
    "exact_log_normconst_categorical",
    "categorical_dlogz_dm",
    "hpp_hyper_log_pdf",
    "hpp_hyper_log_pdf_grad",
    "mu0_from_coefficients",
    "joint_log_posterior",
    "joint_log_posterior_grad_beta",
    "joint_log_posterior_grad_m",
    "power_prior_log_kernel",
    "power_prior_log_kernel_grad",
    "gpp_log_kernel",
    "gpp_log_kernel_grad",
]


@dataclass(frozen=True)
class GlmData:
    """Observed regression data: response y, design X, optional factor labels."""

    y: np.ndarray
    X: np.ndarray
    groups: np.ndarray | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise DataError("design must be n x p with a length-n response")
        if self.groups is not None:
            g = np.asarray(self.groups)
            if g.shape != (X.shape[0],):
                raise DataError("group labels must have length n")
            object.__setattr__(self, "groups", g)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class CiPrior:
    """Conjugate GLM prior with precision lam and n-vector prediction m."""

    lam: float
    m: np.ndarray

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError("CI precision lambda must be positive")
        object.__setattr__(self, "m", np.asarray(self.m, dtype=float))


@dataclass(frozen=True)
class HppHyper:
    """Hyperprior over the n-vector m: precisions lambda0 and means mu0.

    A scalar lambda0 broadcasts to every component; internally both fields
    are stored as length-n vectors.
    """

    lambda0: np.ndarray
    mu0: np.ndarray

    def __post_init__(self):
        mu0 = np.atleast_1d(np.asarray(self.mu0, dtype=float))
        lam0 = np.asarray(self.lambda0, dtype=float)
        if lam0.ndim == 0:
            lam0 = np.full(mu0.shape, float(lam0))
        if lam0.shape != mu0.shape:
            raise DomainError("lambda0 and mu0 lengths differ")
        if not np.all(lam0 > 0):
            raise DomainError("all lambda0 components must be positive")
        object.__setattr__(self, "lambda0", lam0)
        object.__setattr__(self, "mu0", mu0)

    @property
    def n(self) -> int:
        return self.mu0.shape[0]


@dataclass(frozen=True)
class PowerPriorConfig:
    """Power-prior inputs: discounting a0 and the full historical data set."""

    a0: float
    y0: np.ndarray
    X0: np.ndarray

    def __post_init__(self):
        if not 0.0 < self.a0 <= 1.0:
            raise DomainError("a0 must lie in (0, 1]")
        y0 = np.asarray(self.y0, dtype=float)
        X0 = np.asarray(self.X0, dtype=float)
        if X0.ndim != 2 or y0.shape != (X0.shape[0],):
            raise DataError("historical design must be n0 x p with length-n0 response")
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "X0", X0)


@dataclass(frozen=True)
class GppConfig:
    """Diagonal Gaussian power prior: center mu_beta, scales sigma_beta, power lam."""

    mu_beta: np.ndarray
    sigma_beta: np.ndarray
    lam: float

    def __post_init__(self):
        mu = np.asarray(self.mu_beta, dtype=float)
        sd = np.asarray(self.sigma_beta, dtype=float)
        if mu.shape != sd.shape:
            raise DomainError("mu_beta and sigma_beta lengths differ")
        if not np.all(sd > 0):
            raise DomainError("all sigma_beta components must be positive")
        if not 0.0 < self.lam <= 1.0:
            raise DomainError("GPP power lambda must lie in (0, 1]")
        object.__setattr__(self, "mu_beta", mu)
        object.__setattr__(self, "sigma_beta", sd)


# -- CI prior kernel -------------------------------------------------------


def ci_log_kernel(beta, prior: CiPrior, X, family) -> float:
    """lam * [m' theta(X beta) - J' b(theta(X beta))], canonical theta-link."""
    fam = get_family(family)
    X = np.asarray(X, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if prior.m.shape != (X.shape[0],) or beta.shape != (X.shape[1],):
        raise DataError("dimension mismatch between beta, m, and design")
    eta = fam.check_canonical(X @ beta)
    return float(prior.lam * (prior.m @ eta - np.sum(fam.cumulant(eta))))


def ci_log_kernel_grad(beta, prior: CiPrior, X, family) -> np.ndarray:
    """Gradient in beta: lam * X' (m - bdot(X beta))."""
    fam = get_family(family)
    X = np.asarray(X, dtype=float)
    eta = fam.check_canonical(X @ np.asarray(beta, dtype=float))
    return prior.lam * (X.T @ (prior.m - fam.to_mean(eta)))


# -- normalizing constants -------------------------------------------------


def _laplace_logz(fam: Family, lam, m, X, beta_init=None, score_tol=None):
    """Laplace log Z(lam, lam*m) and the inner maximizer, for warm starting."""
    n, p = X.shape
    if score_tol is None:
        score_tol = 1e-10 * n * (1.0 + float(np.max(np.abs(m))))
    beta = beta_init
    if beta is None:
        beta = _start_beta(fam, m, X)
    else:
        kern0, _ = _eval_kernel(fam, m, X, beta)
        if not np.isfinite(kern0):
            beta = _start_beta(fam, m, X)
    beta, eta, kern, _, converged = _newton_max(fam, m, X, beta, score_tol)
    if not converged:
        raise FitError(
            "inner fit for the Laplace constant did not converge", last_beta=beta
        )
    w = fam.cumulant_curvature(eta)
    H = (X.T * w) @ X
    sign, logdet = np.linalg.slogdet(lam * H)
    if sign <= 0:
        raise SingularMatrixError(
            "information matrix not positive definite at the maximizer"
        )
    logz = 0.5 * p * np.log(2.0 * np.pi) - 0.5 * logdet + lam * kern
    return float(logz), beta


def laplace_log_normconst(lam: float, m, X, family) -> float:
    """Laplace approximation to log Z(lam, lam*m) of the CI prior.

    Uses the p-dimensional constant (2 pi)^{p/2} together with the inner
    IRLS maximizer beta_m and observed information on the unit-precision
    scale, so the determinant term is |lam * X' W X|.  Exact for the
    normal family.
    """
    fam = get_family(family)
    if not lam > 0:
        raise DomainError("lambda must be positive")
    m = np.asarray(m, dtype=float)
    X = np.asarray(X, dtype=float)
    # Route through the public fitter for validation, then reuse its optimum.
    fit = irls(fam, m, X, precision=1.0)
    logz, _ = _laplace_logz(fam, lam, m, X, beta_init=fit.beta_hat)
    return logz


def exact_log_normconst_categorical(lam: float, m, group_sizes, family) -> float:
    """Exact log Z for a factor-only design with J cells.

    ``m`` holds one prediction per cell; cell j with n_j observations
    contributes the i.i.d. normalizing constant log Z(lam*n_j, lam*n_j*m_j)
    (a log-beta function for the bernoulli family, log-gamma forms for the
    count families, a Gaussian integral for the normal).
    """
    fam = get_family(family)
    if not lam > 0:
        raise DomainError("lambda must be positive")
    m = np.atleast_1d(np.asarray(m, dtype=float))
    sizes = np.atleast_1d(np.asarray(group_sizes, dtype=float))
    if m.shape != sizes.shape:
        raise UnsupportedDesignError("one prediction and one size per cell required")
    if not np.all(sizes >= 1):
        raise UnsupportedDesignError("cell sizes must be positive counts")
    total = 0.0
    for mj, nj in zip(m, sizes):
        total += dy_log_normconst(fam, lam * nj, lam * nj * mj)
    return float(total)


def _dlogz_dc(fam: Family, a: float, c: float) -> float:
    """d/dc of log Z(a, c) for each family's closed form."""
    from scipy.special import digamma

    if fam.kind == "bernoulli":
        return float(digamma(c) - digamma(a - c))
    if fam.kind == "poisson":
        return float(digamma(c) - np.log(a))
    if fam.kind == "gamma":
        return float(-(a + 1.0) / c)
    return float(c / a)


def categorical_dlogz_dm(lam: float, m, groups, family) -> np.ndarray:
    """Gradient of the exact categorical log Z in the full n-vector m.

    ``groups`` are integer cell labels per observation; component i of the
    result is lam * dlogZ/dc at (a_j, c_j) for i's cell, with
    a_j = lam * n_j and c_j = lam * sum of m within the cell.
    """
    fam = get_family(family)
    m = np.asarray(m, dtype=float)
    groups = np.asarray(groups)
    labels, idx = np.unique(groups, return_inverse=True)
    grad = np.empty_like(m)
    for j in range(labels.size):
        mask = idx == j
        nj = float(np.sum(mask))
        cj = lam * float(np.sum(m[mask]))
        grad[mask] = lam * _dlogz_dc(fam, lam * nj, cj)
    return grad


# -- hyperprior --------------------------------------------------------------


def hpp_hyper_log_pdf(m, hyper: HppHyper, family) -> float:
    """Unnormalized log hyperprior of the n-vector m.

    Sum of independent per-component conjugate log densities
    ``lambda0_i * [bdot_inv(m_i) mu0_i - b(bdot_inv(m_i))] - log v(m_i)``.
    Boundary components yield -inf rather than an error.
    """
    fam = get_family(family)
    m = np.asarray(m, dtype=float)
    if m.shape != hyper.mu0.shape:
        raise DataError("m and hyperprior lengths differ")
    if not fam.mean_domain.contains(m, strict=True):
        return -np.inf
    nu = fam.to_canonical(m)
    val = np.sum(hyper.lambda0 * (nu * hyper.mu0 - fam.cumulant(nu))) - np.sum(
        np.log(fam.variance(m))
    )
    return float(val)


def hpp_hyper_log_pdf_grad(m, hyper: HppHyper, family) -> np.ndarray:
    """Gradient in m: lambda0 * (mu0 - m) / v(m) - v'(m) / v(m)."""
    fam = get_family(family)
    m = np.asarray(m, dtype=float)
    v = fam.variance(m)
    return hyper.lambda0 * (hyper.mu0 - m) / v - fam.variance_deriv(m) / v


def mu0_from_coefficients(X1, alpha0, family) -> np.ndarray:
    """Prior predictions mu0 = g_inv(X1 alpha0), required strictly interior.

    Saturated link inversions (overflow to the domain boundary) are
    rejected rather than clamped.
    """
    fam = get_family(family)
    X1 = np.asarray(X1, dtype=float)
    alpha0 = np.asarray(alpha0, dtype=float)
    if X1.ndim != 2 or alpha0.shape != (X1.shape[1],):
        raise DataError("coefficient prediction needs X1 (n x q) and alpha0 (q,)")
    eta = X1 @ alpha0
    if fam.kind == "gamma" and not np.all(eta < 0):
        raise DomainError("gamma-family predictions need X1 alpha0 < 0")
    with np.errstate(over="raise"):
        try:
            mu0 = fam.linkinv(eta)
        except FloatingPointError:
            raise DomainError(
                "link inversion overflowed; predictions saturate the mean domain"
            ) from None
    if not fam.mean_domain.contains(mu0, strict=True):
        raise DomainError("predictions saturate the boundary of the mean domain")
    return np.asarray(mu0, dtype=float)


# -- joint posterior ----------------------------------------------------------


def _validate_categorical(data: GlmData):
    if data.groups is None:
        raise UnsupportedDesignError(
            "exact_categorical requires factor labels on the data"
        )
    labels, idx = np.unique(data.groups, return_inverse=True)
    J = labels.size
    if data.p != J:
        raise UnsupportedDesignError(
            "exact_categorical requires a one-hot cell-indicator design"
        )
    expected = np.zeros((data.n, J))
    expected[np.arange(data.n), idx] = 1.0
    if not np.array_equal(data.X, expected):
        raise UnsupportedDesignError(
            "exact_categorical requires a one-hot cell-indicator design"
        )
    return labels, idx


def _log_normconst(data: GlmData, lam, m, fam, normconst: str, beta_init=None):
    if normconst == "laplace":
        return _laplace_logz(fam, lam, m, data.X, beta_init=beta_init)
    if normconst == "exact_categorical":
        labels, idx = _validate_categorical(data)
        sums = np.bincount(idx, weights=m)
        sizes = np.bincount(idx).astype(float)
        total = 0.0
        for cj, nj in zip(sums, sizes):
            total += dy_log_normconst(fam, lam * nj, lam * cj)
        return float(total), None
    raise DomainError(f"unknown normconst method {normconst!r}")


def joint_log_posterior(
    beta,
    m,
    data: GlmData,
    lam: float,
    hyper: HppHyper,
    family,
    normconst: str = "laplace",
) -> float:
    """Unnormalized joint log posterior of (beta, m) under the HPP.

    CI kernel with precision 1 + lam and shape (y + lam*m) / (1 + lam),
    plus the hyperprior log density of m, minus log Z(lam, lam*m) by the
    selected method.
    """
    fam = get_family(family)
    m = np.asarray(m, dtype=float)
    if not lam > 0:
        raise DomainError("lambda must be positive")
    hyper_val = hpp_hyper_log_pdf(m, hyper, fam)
    if not np.isfinite(hyper_val):
        return -np.inf
    post_prior = CiPrior(1.0 + lam, (data.y + lam * m) / (1.0 + lam))
    kern = ci_log_kernel(beta, post_prior, data.X, fam)
    logz, _ = _log_normconst(data, lam, m, fam, normconst)
    return float(kern + hyper_val - logz)


def joint_log_posterior_grad_beta(
    beta, m, data: GlmData, lam: float, hyper: HppHyper, family, normconst="laplace"
) -> np.ndarray:
    """Gradient in beta; the normalizing-constant term is beta-free."""
    fam = get_family(family)
    m = np.asarray(m, dtype=float)
    eta = fam.check_canonical(data.X @ np.asarray(beta, dtype=float))
    return data.X.T @ (data.y + lam * m - (1.0 + lam) * fam.to_mean(eta))


def joint_log_posterior_grad_m(
    beta, m, data: GlmData, lam: float, hyper: HppHyper, family,
    normconst: str = "exact_categorical",
) -> np.ndarray:
    """Gradient in m, available when the exact categorical normalizer is used."""
    if normconst != "exact_categorical":
        raise UnsupportedDesignError(
            "analytic m-gradient requires normconst='exact_categorical'"
        )
    fam = get_family(family)
    m = np.asarray(m, dtype=float)
    _validate_categorical(data)
    eta = fam.check_canonical(data.X @ np.asarray(beta, dtype=float))
    return (
        lam * eta
        + hpp_hyper_log_pdf_grad(m, hyper, fam)
        - categorical_dlogz_dm(lam, m, data.groups, fam)
    )


# -- historical-data priors ---------------------------------------------------


def power_prior_log_kernel(beta, cfg: PowerPriorConfig, family) -> float:
    """a0 * [discounted historical log likelihood], flat initial prior."""
    fam = get_family(family)
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (cfg.X0.shape[1],):
        raise DataError("beta length differs from historical design columns")
    eta = fam.check_canonical(cfg.X0 @ beta)
    return float(cfg.a0 * (cfg.y0 @ eta - np.sum(fam.cumulant(eta))))


def power_prior_log_kernel_grad(beta, cfg: PowerPriorConfig, family) -> np.ndarray:
    fam = get_family(family)
    eta = fam.check_canonical(cfg.X0 @ np.asarray(beta, dtype=float))
    return cfg.a0 * (cfg.X0.T @ (cfg.y0 - fam.to_mean(eta)))


def gpp_log_kernel(beta, cfg: GppConfig) -> float:
    """Powered diagonal Gaussian log kernel, up to a beta-free constant."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != cfg.mu_beta.shape:
        raise DataError("beta length differs from GPP center")
    z = (beta - cfg.mu_beta) / cfg.sigma_beta
    return float(-0.5 * cfg.lam * np.sum(z**2))


def gpp_log_kernel_grad(beta, cfg: GppConfig) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    return -cfg.lam * (beta - cfg.mu_beta) / cfg.sigma_beta**2
