"""Hyperparameter elicitation from a previous study's summary statistics.

Published fits usually report coefficient estimates and standard errors
only.  The delta method propagates those standard errors to a
per-observation prediction variance on the mean scale, which is then
inverted through each family's hyperprior variance formula to obtain the
precision vector lambda0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError, InfeasibleVarianceError
from .families import get_family
from .irls import mle_with_se
from .kernels import GlmData, HppHyper, mu0_from_coefficients

__all__ = [
    "HistoricalSummary",
    "ElicitationResult",
    "LAMBDA0_CAP",
    "delta_method_tau",
    "lambda0_from_tau",
    "build_hpp_from_summary",
    "summary_from_data",
]

# Hyperprior precisions are capped here: beyond this the hyperprior is
# numerically a point mass and the prior reduces to its conjugate limit.
LAMBDA0_CAP = 1e12


@dataclass(frozen=True)
class HistoricalSummary:
    """Historical MLEs and standard errors, optionally with the full data."""

    beta0_hat: np.ndarray
    se0: np.ndarray
    data: GlmData | None = None

    def __post_init__(self):
        b = np.asarray(self.beta0_hat, dtype=float)
        s = np.asarray(self.se0, dtype=float)
        if b.shape != s.shape or b.ndim != 1:
            raise DataError("beta0_hat and se0 must be equal-length vectors")
        if not np.all(s > 0):
            raise DomainError("all historical standard errors must be positive")
        object.__setattr__(self, "beta0_hat", b)
        object.__setattr__(self, "se0", s)

    @property
    def p(self) -> int:
        return self.beta0_hat.size


def summary_from_data(family, data: GlmData) -> HistoricalSummary:
    """Fit the historical data by maximum likelihood and wrap the result."""
    fit = mle_with_se(family, data.y, data.X)
    return HistoricalSummary(fit.beta_hat, fit.standard_errors, data=data)


def delta_method_tau(X, summary: HistoricalSummary, family) -> np.ndarray:
    """Per-observation prediction variances on the mean scale.

    tau_i = sum_j x_ij^2 se_j^2 / [g'(g_inv(x_i' beta0))]^2, the
    diagonal-covariance delta-method approximation.
    """
    fam = get_family(family)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != summary.p:
        raise DataError("design columns must match the historical coefficients")
    mu = mu0_from_coefficients(X, summary.beta0_hat, fam)
    quad = (X**2) @ (summary.se0**2)
    gdot = fam.link_deriv(mu)
    return quad / gdot**2


def lambda0_from_tau(family, mu0_i: float, tau_i: float) -> float:
    """Invert the hyperprior variance formula: find lambda0 with Var(m) = tau.

    bernoulli: Var = mu0(1-mu0)/(lambda0+1); poisson: mu0/lambda0;
    normal: 1/lambda0; gamma family: mu0^2/(lambda0-1) from the
    inverse-gamma form, accepted only when the implied lambda0 exceeds 2.
    """
    fam = get_family(family)
    if not tau_i > 0:
        raise InfeasibleVarianceError("prediction variance must be positive")
    fam.check_mean(mu0_i)
    if fam.kind == "bernoulli":
        bound = mu0_i * (1.0 - mu0_i)
        if tau_i >= bound:
            raise InfeasibleVarianceError(
                f"requested Var(m) = {tau_i:.3g} is not attainable: a beta "
                f"hyperprior with mean {mu0_i:.3g} has variance below {bound:.3g}"
            )
        return bound / tau_i - 1.0
    if fam.kind == "poisson":
        return mu0_i / tau_i
    if fam.kind == "gamma":
        lam0 = 1.0 + mu0_i**2 / tau_i
        if lam0 <= 2.0:
            raise InfeasibleVarianceError(
                f"requested Var(m) = {tau_i:.3g} implies lambda0 = {lam0:.3g} <= 2 "
                "for the inverse-gamma hyperprior; reduce the variance"
            )
        return lam0
    return 1.0 / tau_i


@dataclass(frozen=True)
class ElicitationResult:
    hyper: HppHyper
    tau: np.ndarray
    capped: np.ndarray  # True where lambda0 hit the degeneracy cap


def build_hpp_from_summary(X, summary: HistoricalSummary, family) -> ElicitationResult:
    """HPP hyperparameters from historical coefficients and standard errors.

    mu0 = g_inv(X beta0_hat); lambda0 inverts the per-component variance.
    Components whose implied precision exceeds LAMBDA0_CAP are capped and
    flagged (the hyperprior is then effectively degenerate at mu0).
    Infeasible components are collected and reported together.
    """
    fam = get_family(family)
    X = np.asarray(X, dtype=float)
    mu0 = mu0_from_coefficients(X, summary.beta0_hat, fam)
    tau = delta_method_tau(X, summary, fam)
    n = mu0.size
    lam0 = np.empty(n)
    capped = np.zeros(n, dtype=bool)
    bad = []
    messages = []
    for i in range(n):
        try:
            lam0[i] = lambda0_from_tau(fam, float(mu0[i]), float(tau[i]))
        except InfeasibleVarianceError as exc:
            bad.append(i)
            messages.append(f"component {i}: {exc}")
            continue
        if lam0[i] > LAMBDA0_CAP:
            lam0[i] = LAMBDA0_CAP
            capped[i] = True
    if bad:
        raise InfeasibleVarianceError(
            "infeasible hyperprior variance at "
            f"{len(bad)} component(s): " + "; ".join(messages[:5]),
            indices=bad,
        )
    return ElicitationResult(HppHyper(lam0, mu0), tau, capped)
