"""Newton/IRLS maximization of GLM log kernels.

Fits ``precision * [r' theta(X beta) - J' b(theta(X beta))]`` over beta
under the canonical link, where the response ``r`` may be fractional
(anywhere in the closed mean domain).  This is the inner optimizer behind
the Laplace normalizing constant and the source of maximum-likelihood
estimates and standard errors.

The returned observed information is ``precision * X' W X`` evaluated at
the maximizer, with working weights ``W = diag(v(mu_i))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, FitError, SingularMatrixError
from .families import Family, get_family

__all__ = ["FitResult", "irls", "mle_with_se"]

MAX_HALVINGS = 20


@dataclass(frozen=True)
class FitResult:
    beta_hat: np.ndarray
    observed_information: np.ndarray
    log_kernel_at_max: float
    iterations: int
    converged: bool
    standard_errors: np.ndarray | None = None


def _check_response(family: Family, r: np.ndarray):
    """Responses may sit on the closed boundary of the mean domain."""
    if family.kind == "bernoulli":
        if np.any(r < 0.0) or np.any(r > 1.0):
            raise DataError("bernoulli pseudo-response must lie in [0, 1]")
    elif family.kind in ("poisson", "gamma"):
        if np.any(r < 0.0):
            raise DataError(f"{family.kind} pseudo-response must be nonnegative")


def _start_beta(family: Family, r: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Zero start with the intercept set from the mean response.

    The intercept coordinate (an exact all-ones column, if present) starts
    at bdot_inv(mean(r)) with the mean nudged off the boundary; without an
    intercept column a least-squares projection of the canonical-scale
    response is used so the gamma family starts inside its domain.
    """
    n, p = X.shape
    beta = np.zeros(p)
    rbar = float(np.mean(r))
    if family.kind == "bernoulli":
        rbar = min(max(rbar, 1.0 / (n + 2.0)), 1.0 - 1.0 / (n + 2.0))
    elif family.kind in ("poisson", "gamma"):
        rbar = max(rbar, 1.0 / (n + 2.0))
    ones = np.where(np.all(X == 1.0, axis=0))[0]
    if ones.size:
        beta[ones[0]] = float(family.to_canonical(rbar))
        return beta
    if family.kind == "gamma":
        # No intercept: project the canonical-scale response so X beta < 0.
        r_in = np.maximum(r, rbar / 10.0)
        target = family.to_canonical(r_in)
        beta, *_ = np.linalg.lstsq(X, target, rcond=None)
    return beta


def _eval_kernel(family: Family, r, X, beta):
    """Unit-precision kernel value and linear predictor; -inf off-domain."""
    eta = X @ beta
    if family.kind == "gamma" and not np.all(eta < 0):
        return -np.inf, eta
    if not np.all(np.isfinite(eta)):
        return -np.inf, eta
    with np.errstate(over="ignore"):
        kern = float(r @ eta - np.sum(family.cumulant(eta)))
    return (kern if np.isfinite(kern) else -np.inf), eta


def _newton_max(family: Family, r, X, beta, score_tol: float, max_iter: int = 100):
    """Shared Newton core: maximize r'eta - sum b(eta) from a feasible start.

    Returns (beta, eta, kernel, iterations, converged).  No input
    validation; callers guarantee a finite starting kernel.
    """
    kern, eta = _eval_kernel(family, r, X, beta)
    Xt = X.T
    it = 0
    for it in range(1, max_iter + 1):
        mu = family.to_mean(eta)
        score = Xt @ (r - mu)
        if np.max(np.abs(score)) < score_tol:
            return beta, eta, kern, it - 1, True
        w = family.cumulant_curvature(eta)
        H = (Xt * w) @ X
        try:
            step = np.linalg.solve(H, score)
        except np.linalg.LinAlgError:
            raise FitError(
                "singular working information; fitted means degenerate "
                "(possible separation)",
                last_beta=beta,
                iterations=it,
            ) from None
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            cand = beta + step
            kern_c, eta_c = _eval_kernel(family, r, X, cand)
            if kern_c >= kern - 1e-13 * max(1.0, abs(kern)):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            raise FitError(
                "step halving failed to make progress", last_beta=beta, iterations=it
            )
        beta, kern, eta = cand, kern_c, eta_c
    mu = family.to_mean(eta)
    if np.max(np.abs(Xt @ (r - mu))) < score_tol:
        return beta, eta, kern, max_iter, True
    return beta, eta, kern, max_iter, False


def irls(
    family,
    response,
    X,
    precision: float = 1.0,
    *,
    beta_init=None,
    max_iter: int = 100,
    score_tol: float | None = None,
) -> FitResult:
    """Maximize the scaled GLM log kernel by Newton steps with step halving.

    Parameters
    ----------
    family : Family or str
    response : array (n,)
        Pseudo-response; fractional values in the closed mean domain are
        allowed (the base-measure term is response-only and omitted).
    X : array (n, p)
        Full-column-rank design.
    precision : float
        Positive scale multiplying the kernel; it leaves the maximizer
        unchanged and scales the observed information.
    beta_init : array (p,), optional
        Warm start; defaults to the mean-response start.

    Raises
    ------
    FitError
        On divergence (e.g. separation) or nonconvergence; carries the
        last iterate.
    SingularMatrixError
        On rank-deficient designs.
    """
    fam = get_family(family)
    r = np.asarray(response, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or r.shape != (X.shape[0],):
        raise DataError("design must be n x p with a length-n response")
    if not precision > 0:
        raise DataError("precision must be positive")
    _check_response(fam, r)
    n, p = X.shape
    if np.linalg.matrix_rank(X) < p:
        raise SingularMatrixError("design matrix is rank deficient")
    if score_tol is None:
        score_tol = 1e-10 * n * (1.0 + float(np.max(np.abs(r))))

    beta = (
        np.asarray(beta_init, dtype=float).copy()
        if beta_init is not None
        else _start_beta(fam, r, X)
    )
    kern, _ = _eval_kernel(fam, r, X, beta)
    if not np.isfinite(kern):
        beta = _start_beta(fam, r, X)
        kern, _ = _eval_kernel(fam, r, X, beta)
        if not np.isfinite(kern):
            raise FitError("cannot find a feasible starting point", last_beta=beta)

    beta, eta, kern, it, converged = _newton_max(
        fam, r, X, beta, score_tol, max_iter=max_iter
    )
    mu = fam.to_mean(eta)
    if not converged:
        raise FitError(
            f"no convergence after {max_iter} iterations", last_beta=beta, iterations=it
        )
    if fam.kind == "bernoulli" and float(np.max(np.abs(eta))) > 30.0:
        # A vanishing score at a huge beta means the kernel has no interior
        # maximum: the fitted probabilities sit on the boundary.
        raise FitError(
            "fitted probabilities collapsed to the boundary (separation)",
            last_beta=beta,
            iterations=it,
        )
    w = fam.cumulant_curvature(eta)
    info = precision * ((X.T * w) @ X)
    return FitResult(
        beta_hat=beta,
        observed_information=info,
        log_kernel_at_max=precision * kern,
        iterations=it,
        converged=True,
    )


def mle_with_se(family, y, X) -> FitResult:
    """Maximum-likelihood fit of observed data with Wald standard errors."""
    fam = get_family(family)
    y = fam.check_support(y)
    fit = irls(fam, y, X, precision=1.0)
    try:
        cov = np.linalg.inv(fit.observed_information)
    except np.linalg.LinAlgError:
        raise SingularMatrixError("observed information is singular") from None
    se = np.sqrt(np.diag(cov))
    return FitResult(
        beta_hat=fit.beta_hat,
        observed_information=fit.observed_information,
        log_kernel_at_max=fit.log_kernel_at_max,
        iterations=fit.iterations,
        converged=fit.converged,
        standard_errors=se,
    )
