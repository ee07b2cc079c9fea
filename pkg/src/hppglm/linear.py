"""Exact closed-form results for the normal linear model.

Joint Gaussian prior of (beta, m), marginal Gaussian posterior of beta,
and Gaussian posterior of m, all with unit residual precision and a
common hyperprior precision lambda0.  Rank-deficient designs are a hard
error; no ridge jitter is applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularMatrixError

__all__ = [
    "GaussianMoments",
    "lm_joint_prior",
    "lm_beta_posterior",
    "lm_m_posterior",
    "sample_lm_hpp_joint",
    "effective_precision",
]


@dataclass(frozen=True)
class GaussianMoments:
    """Mean vector and symmetric positive-definite covariance."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.asarray(self.covariance, dtype=float)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        if cov.shape != (mean.size, mean.size):
            raise DomainError("covariance shape does not match the mean")
        if np.max(np.abs(cov - cov.T)) >= 1e-10:
            raise DomainError("covariance is not symmetric")
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise DomainError("covariance is not positive definite") from None

    @property
    def dim(self) -> int:
        return self.mean.size

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        chol = np.linalg.cholesky(self.covariance)
        z = rng.standard_normal((size, self.dim))
        return self.mean + z @ chol.T


def _gram_inverse(X: np.ndarray) -> np.ndarray:
    gram = X.T @ X
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise SingularMatrixError("design matrix is rank deficient") from None
    diag = np.diag(chol)
    # Rounding can let the factorization "succeed" on a singular Gram matrix;
    # a relative diagonal this small means cond(X'X) beyond 1e14.
    if diag.min() <= 1e-7 * diag.max():
        raise SingularMatrixError("design matrix is rank deficient")
    inv_chol = np.linalg.solve(chol, np.eye(chol.shape[0]))
    return inv_chol.T @ inv_chol


def _validate(X, lam, lambda0):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DomainError("X must be a matrix")
    if not (np.isscalar(lam) and lam > 0):
        raise DomainError("lambda must be a positive scalar")
    if not np.isscalar(lambda0):
        raise DomainError(
            "the closed form requires a scalar lambda0; "
            "vector precisions go through the sampler"
        )
    if not lambda0 > 0:
        raise DomainError("lambda0 must be positive")
    return X


def effective_precision(lam: float, lambda0: float) -> float:
    """lambda_H = lambda0 * lambda / (lambda0 + lambda)."""
    return lambda0 * lam / (lambda0 + lam)


def lm_joint_prior(X, lam: float, lambda0: float, mu0) -> GaussianMoments:
    """Joint Gaussian prior of (beta, m), dimension p + n.

    Mean stacks ``beta_hat_mu0 = (X'X)^-1 X' mu0`` over ``mu0``; the
    covariance blocks are ``(1/lam + 1/lambda0) (X'X)^-1`` for beta,
    ``(1/lambda0) (X'X)^-1 X'`` across, and ``(1/lambda0) I_n`` for m.
    """
    X = _validate(X, lam, lambda0)
    n, p = X.shape
    mu0 = np.asarray(mu0, dtype=float)
    if mu0.shape != (n,):
        raise DomainError("mu0 must have one component per observation")
    gram_inv = _gram_inverse(X)
    beta_mu0 = gram_inv @ (X.T @ mu0)
    cov = np.empty((p + n, p + n))
    cov[:p, :p] = (1.0 / lam + 1.0 / lambda0) * gram_inv
    cross = (1.0 / lambda0) * (gram_inv @ X.T)
    cov[:p, p:] = cross
    cov[p:, :p] = cross.T
    cov[p:, p:] = (1.0 / lambda0) * np.eye(n)
    mean = np.concatenate([beta_mu0, mu0])
    return GaussianMoments(mean, 0.5 * (cov + cov.T))


def lm_beta_posterior(X, y, lam: float, lambda0: float, mu0) -> GaussianMoments:
    """Marginal Gaussian posterior of beta.

    The mean is the convex combination of the data MLE and the MLE
    treating mu0 as responses, with weight 1 / (1 + lambda_H); the
    covariance is (1 + lambda_H)^-1 (X'X)^-1.
    """
    X = _validate(X, lam, lambda0)
    y = np.asarray(y, dtype=float)
    mu0 = np.asarray(mu0, dtype=float)
    if y.shape != (X.shape[0],) or mu0.shape != (X.shape[0],):
        raise DomainError("y and mu0 must have one component per observation")
    gram_inv = _gram_inverse(X)
    beta_hat = gram_inv @ (X.T @ y)
    beta_mu0 = gram_inv @ (X.T @ mu0)
    lam_h = effective_precision(lam, lambda0)
    w = 1.0 / (1.0 + lam_h)
    mean = w * beta_hat + (1.0 - w) * beta_mu0
    cov = w * gram_inv
    return GaussianMoments(mean, 0.5 * (cov + cov.T))


def lm_m_posterior(X, y, lam: float, lambda0: float, mu0) -> GaussianMoments:
    """Gaussian posterior of the n-vector m.

    Covariance ``(lambda0 I + lam/(1+lam) H)^-1`` with hat matrix H; the
    mean blends mu0 and the fitted values y_hat through
    ``Lambda = Sigma_m * lambda0``.
    """
    X = _validate(X, lam, lambda0)
    y = np.asarray(y, dtype=float)
    mu0 = np.asarray(mu0, dtype=float)
    n = X.shape[0]
    if y.shape != (n,) or mu0.shape != (n,):
        raise DomainError("y and mu0 must have one component per observation")
    gram_inv = _gram_inverse(X)
    hat = X @ gram_inv @ X.T
    c = lam / (1.0 + lam)
    # H idempotent: (lambda0 I + c H)^-1 = (I - c/(lambda0+c) H) / lambda0.
    sigma_m = (np.eye(n) - (c / (lambda0 + c)) * hat) / lambda0
    y_fit = hat @ y
    mean = sigma_m @ (lambda0 * mu0 + c * y_fit)
    return GaussianMoments(mean, 0.5 * (sigma_m + sigma_m.T))


def sample_lm_hpp_joint(X, y, lam, lambda0, mu0, size, rng) -> np.ndarray:
    """Exact joint draws of (beta, m), factored as m then beta given m."""
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    m_post = lm_m_posterior(X, y, lam, lambda0, mu0)
    m_draws = m_post.sample(size, rng)
    gram_inv = _gram_inverse(X)
    proj = gram_inv @ X.T
    chol_beta = np.linalg.cholesky(gram_inv / (1.0 + lam))
    shape = (y + lam * m_draws) / (1.0 + lam)
    beta_means = shape @ proj.T
    beta_draws = beta_means + rng.standard_normal((size, p)) @ chol_beta.T
    return np.column_stack([beta_draws, m_draws])
