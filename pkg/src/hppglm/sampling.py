"""MCMC over (beta, m) for hierarchical-prediction-prior posteriors.

The prediction vector m is sampled on an unconstrained scale m-tilde
(logit for bernoulli, log for the count families, identity for normal).
Two algorithms are provided:

``adaptive_rw``
    Blocked Gaussian random walk: beta moves as one block with a
    covariance-adapted proposal targeting 0.234 acceptance, each
    m-tilde component moves with its own Robbins-Monro-adapted scale
    targeting 0.44.  Adaptation runs during warmup only and is frozen
    afterwards.

``hmc_fd``
    Fixed-length leapfrog Hamiltonian Monte Carlo with dual-averaging
    step-size adaptation.  Gradients are analytic everywhere except the
    Laplace normalizing-constant term, which is differenced centrally
    in m-tilde.

Chains use independent generators spawned from the root seed and are
merged in chain order, so results are bit-reproducible for a fixed
configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import DataError, DomainError, FitError, StuckChainError
from .families import Family, get_family
from .iid import dy_log_normconst
from .irls import irls
from .kernels import (
    CiPrior,
    GlmData,
    GppConfig,
    HppHyper,
    PowerPriorConfig,
    _laplace_logz,
    _validate_categorical,
    gpp_log_kernel,
    gpp_log_kernel_grad,
    power_prior_log_kernel,
    power_prior_log_kernel_grad,
)

__all__ = [
    "SamplerConfig",
    "Draws",
    "transform_m",
    "inverse_transform_m",
    "HppModel",
    "BetaPosteriorModel",
    "sample_posterior",
    "diagnostics",
]

ALGORITHMS = ("adaptive_rw", "hmc_fd")


@dataclass(frozen=True)
class SamplerConfig:
    """Run-length, seeding, and algorithm knobs shared by all samplers.

    ``n_keep`` counts kept draws per chain after thinning; the defaults
    (4 chains x 6000 kept, 1000 warmup, no thinning) give 24000 retained
    draws in total.
    """

    n_chains: int = 4
    n_warmup: int = 1000
    n_keep: int = 6000
    seed: int = 0
    algorithm: str = "adaptive_rw"
    target_accept: float = 0.8
    thinning: int = 1
    leapfrog_steps: int = 32
    beta_updates_per_sweep: int = 3

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise DomainError(f"algorithm must be one of {ALGORITHMS}")
        if min(self.n_chains, self.n_keep, self.thinning) < 1 or self.n_warmup < 0:
            raise DomainError("chain counts, kept draws, and thinning must be positive")
        if not 0.0 < self.target_accept < 1.0:
            raise DomainError("target_accept must lie in (0, 1)")


@dataclass(frozen=True)
class Draws:
    """Posterior samples: (chains, kept, dim) over (beta, m) or beta alone."""

    samples: np.ndarray
    param_names: list[str]
    log_posterior: np.ndarray
    acceptance_rate: np.ndarray
    seed: int
    algorithm: str
    acceptance_detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(np.isfinite(self.samples)):
            raise DomainError("kept samples contain non-finite values")

    @property
    def n_chains(self) -> int:
        return self.samples.shape[0]

    @property
    def n_kept(self) -> int:
        return self.samples.shape[1]

    @property
    def dim(self) -> int:
        return self.samples.shape[2]

    def flat(self) -> np.ndarray:
        return self.samples.reshape(-1, self.dim)


# -- unconstrained reparameterization of m ------------------------------------


def transform_m(family, m):
    """Map m to the unconstrained scale; returns (m_tilde, log_jacobian).

    The Jacobian is log|det dm/dm_tilde|, the density correction for
    targeting the posterior of m on the m_tilde scale.
    """
    fam = get_family(family)
    m = np.asarray(m, dtype=float)
    fam.check_mean(m)
    if fam.kind == "bernoulli":
        mt = np.log(m) - np.log1p(-m)
        return mt, float(np.sum(np.log(m) + np.log1p(-m)))
    if fam.kind in ("poisson", "gamma"):
        mt = np.log(m)
        return mt, float(np.sum(mt))
    return m.copy(), 0.0


def inverse_transform_m(family, m_tilde):
    fam = get_family(family)
    mt = np.asarray(m_tilde, dtype=float)
    if fam.kind == "bernoulli":
        return expit(mt)
    if fam.kind in ("poisson", "gamma"):
        return np.exp(mt)
    return mt.copy()


def _invert_mt_scalar(kind: str, mt_i: float) -> float:
    """Scalar inverse transform that saturates instead of overflowing."""
    if kind == "bernoulli":
        if mt_i >= 0.0:
            return 1.0 / (1.0 + math.exp(-min(mt_i, 745.0)))
        e = math.exp(max(mt_i, -745.0))
        return e / (1.0 + e)
    if kind in ("poisson", "gamma"):
        return math.exp(mt_i) if mt_i < 700.0 else math.inf
    return mt_i


def _hyper_plus_jac_terms(fam: Family, mt, lam0, mu0):
    """Per-component hyperprior-plus-Jacobian terms on the m_tilde scale.

    Algebraically equal to the componentwise hyperprior log density of m
    plus log|dm_i/dmt_i|, but written directly in m_tilde so boundary
    overflow cannot occur.
    """
    if fam.kind == "bernoulli":
        a = lam0 * mu0
        b = lam0 * (1.0 - mu0)
        return a * mt - (a + b) * np.logaddexp(0.0, mt)
    if fam.kind == "poisson":
        return lam0 * mu0 * mt - lam0 * np.exp(mt)
    if fam.kind == "gamma":
        return -(lam0 + 1.0) * mt - lam0 * mu0 * np.exp(-mt)
    return lam0 * (mt * mu0 - 0.5 * mt**2)


def _hyper_plus_jac_grad(fam: Family, mt, lam0, mu0):
    """d/dmt of the terms above; used by the HMC path."""
    if fam.kind == "bernoulli":
        return lam0 * mu0 - lam0 * expit(mt)
    if fam.kind == "poisson":
        return lam0 * mu0 - lam0 * np.exp(mt)
    if fam.kind == "gamma":
        return -(lam0 + 1.0) + lam0 * mu0 * np.exp(-mt)
    return -lam0 * (mt - mu0)


def _mt_scale_init(fam: Family, lam0, mu0):
    """Hyperprior curvature on the m_tilde scale, for initial proposal scales."""
    if fam.kind == "bernoulli":
        curv = lam0 * mu0 * (1.0 - mu0)
    elif fam.kind == "poisson":
        curv = lam0 * mu0
    else:
        curv = np.asarray(lam0, dtype=float)
    return 2.38 / np.sqrt(np.maximum(curv, 1e-8))


# -- model specifications ------------------------------------------------------


@dataclass(frozen=True)
class HppModel:
    """Joint posterior of (beta, m) for a GLM under the HPP."""

    family: Family
    data: GlmData
    lam: float
    hyper: HppHyper
    normconst: str = "laplace"

    def __post_init__(self):
        fam = get_family(self.family)
        object.__setattr__(self, "family", fam)
        if not self.lam > 0:
            raise DomainError("lambda must be positive")
        if self.hyper.n != self.data.n:
            raise DataError("hyperprior length differs from the number of observations")
        if self.normconst not in ("laplace", "exact_categorical"):
            raise DomainError("normconst must be 'laplace' or 'exact_categorical'")
        if self.normconst == "exact_categorical":
            _validate_categorical(self.data)

    @property
    def dim(self) -> int:
        return self.data.p + self.data.n

    def param_names(self) -> list[str]:
        return [f"beta{j}" for j in range(self.data.p)] + [
            f"m{i + 1}" for i in range(self.data.n)
        ]

    def initial_point(self):
        """beta from the data MLE, m_tilde from the hyperprior means.

        Falls back to the conjugate-posterior mode (pseudo-response
        (y + lam*mu0)/(1 + lam), always interior) when the raw MLE does
        not exist, e.g. under separation.
        """
        try:
            beta = irls(self.family, self.data.y, self.data.X).beta_hat
        except FitError:
            r = (self.data.y + self.lam * self.hyper.mu0) / (1.0 + self.lam)
            beta = irls(self.family, r, self.data.X).beta_hat
        mt, _ = transform_m(self.family, self.hyper.mu0)
        return beta, mt

    def log_posterior_mt(self, beta, mt) -> float:
        """Joint log posterior with m on the unconstrained scale."""
        fam = self.family
        m = inverse_transform_m(fam, mt)
        if not fam.mean_domain.contains(m, strict=True):
            return -np.inf
        eta = self.data.X @ beta
        if fam.kind == "gamma" and not np.all(eta < 0):
            return -np.inf
        kern = float(
            (self.data.y + self.lam * m) @ eta
            - (1.0 + self.lam) * np.sum(fam.cumulant(eta))
        )
        hj = float(
            np.sum(
                _hyper_plus_jac_terms(fam, mt, self.hyper.lambda0, self.hyper.mu0)
            )
        )
        logz = self._logz(m)
        return kern + hj - logz

    def _logz(self, m, beta_init=None):
        if self.normconst == "laplace":
            logz, _ = _laplace_logz(self.family, self.lam, m, self.data.X, beta_init)
            return logz
        labels, idx = np.unique(self.data.groups, return_inverse=True)
        sums = np.bincount(idx, weights=m)
        sizes = np.bincount(idx).astype(float)
        return float(
            sum(
                dy_log_normconst(self.family, self.lam * nj, self.lam * cj)
                for cj, nj in zip(sums, sizes)
            )
        )

    def grad_mt_logz_fd(self, mt, step_scale: float = 1e-5) -> np.ndarray:
        """Central finite differences of log Z(lam, lam*m) in m_tilde."""
        grad = np.empty_like(mt)
        for i in range(mt.size):
            h = step_scale * (1.0 + abs(mt[i]))
            up = mt.copy()
            up[i] += h
            dn = mt.copy()
            dn[i] -= h
            grad[i] = (
                self._logz(inverse_transform_m(self.family, up))
                - self._logz(inverse_transform_m(self.family, dn))
            ) / (2.0 * h)
        return grad


@dataclass(frozen=True)
class BetaPosteriorModel:
    """Posterior over beta alone: likelihood plus a fixed prior kernel.

    ``prior`` may be a CiPrior (conjugate posterior, in which case the
    likelihood is absorbed into the updated kernel), a PowerPriorConfig,
    a GppConfig, or None for a flat prior.
    """

    family: Family
    data: GlmData
    prior: object = None

    def __post_init__(self):
        fam = get_family(self.family)
        object.__setattr__(self, "family", fam)
        if isinstance(self.prior, CiPrior) and self.prior.m.shape != (self.data.n,):
            raise DataError("CI prior prediction length differs from data")

    @property
    def dim(self) -> int:
        return self.data.p

    def param_names(self) -> list[str]:
        return [f"beta{j}" for j in range(self.data.p)]

    def initial_point(self):
        try:
            return irls(self.family, self.data.y, self.data.X).beta_hat
        except FitError:
            if isinstance(self.prior, CiPrior):
                r = (self.data.y + self.prior.lam * self.prior.m) / (
                    1.0 + self.prior.lam
                )
                return irls(self.family, r, self.data.X).beta_hat
            raise

    def log_density(self, beta) -> float:
        fam = self.family
        eta = self.data.X @ beta
        if fam.kind == "gamma" and not np.all(eta < 0):
            return -np.inf
        if not np.all(np.isfinite(eta)):
            return -np.inf
        prior = self.prior
        if isinstance(prior, CiPrior):
            shape = self.data.y + prior.lam * prior.m
            return float(
                shape @ eta - (1.0 + prior.lam) * np.sum(fam.cumulant(eta))
            )
        loglik = float(self.data.y @ eta - np.sum(fam.cumulant(eta)))
        if prior is None:
            return loglik
        if isinstance(prior, PowerPriorConfig):
            return loglik + power_prior_log_kernel(beta, prior, fam)
        if isinstance(prior, GppConfig):
            return loglik + gpp_log_kernel(beta, prior)
        raise DomainError(f"unsupported prior type {type(prior).__name__}")

    def grad_log_density(self, beta) -> np.ndarray:
        fam = self.family
        X = self.data.X
        eta = fam.check_canonical(X @ beta)
        prior = self.prior
        if isinstance(prior, CiPrior):
            shape = self.data.y + prior.lam * prior.m
            return X.T @ (shape - (1.0 + prior.lam) * fam.to_mean(eta))
        grad = X.T @ (self.data.y - fam.to_mean(eta))
        if prior is None:
            return grad
        if isinstance(prior, PowerPriorConfig):
            return grad + power_prior_log_kernel_grad(beta, prior, fam)
        if isinstance(prior, GppConfig):
            return grad + gpp_log_kernel_grad(beta, prior)
        raise DomainError(f"unsupported prior type {type(prior).__name__}")


# -- adaptive random walk ------------------------------------------------------


def _rm_gamma(t: int) -> float:
    return (t + 20.0) ** -0.6


class _BlockAdapter:
    """Covariance-adapted Gaussian block proposal with Robbins-Monro scaling."""

    def __init__(self, cov0, target: float):
        self.p = cov0.shape[0]
        self.chol = np.linalg.cholesky(cov0 * (2.38**2 / self.p))
        self.log_s = 0.0
        self.target = target
        self._hist = []

    def propose(self, x, rng):
        return x + math.exp(self.log_s) * (self.chol @ rng.standard_normal(self.p))

    def adapt(self, t, x, acc_prob):
        self.log_s += _rm_gamma(t) * (acc_prob - self.target)
        self._hist.append(x.copy())
        if len(self._hist) >= 200 and len(self._hist) % 100 == 0:
            recent = np.asarray(self._hist[len(self._hist) // 2 :])
            cov = np.atleast_2d(np.cov(recent.T)) + 1e-10 * np.eye(self.p)
            try:
                self.chol = np.linalg.cholesky(cov * (2.38**2 / self.p))
            except np.linalg.LinAlgError:
                pass


def _sample_hpp_rw(model: HppModel, cfg: SamplerConfig, rng, chain_seed):
    fam = model.family
    data = model.data
    lam = model.lam
    X, y = data.X, data.y
    n, p = data.n, data.p
    lam0, mu0 = model.hyper.lambda0, model.hyper.mu0

    beta, mt = model.initial_point()
    beta = beta.copy()
    mt = mt.copy()
    m = inverse_transform_m(fam, mt)

    eta = X @ beta
    bsum = float(np.sum(fam.cumulant(eta)))
    lp_kern = float((y + lam * m) @ eta - (1.0 + lam) * bsum)
    hj = _hyper_plus_jac_terms(fam, mt, lam0, mu0)

    laplace = model.normconst == "laplace"
    normal_fast = laplace and fam.kind == "normal"
    if laplace:
        if normal_fast:
            gram = X.T @ X
            sign, logdet_gram = np.linalg.slogdet(lam * gram)
            hat = X @ np.linalg.solve(gram, X.T)
            hm = hat @ m
            logz_const = 0.5 * p * math.log(2.0 * math.pi) - 0.5 * logdet_gram
            logz = logz_const + 0.5 * lam * float(m @ hm)
            bhat = None
        else:
            logz, bhat = _laplace_logz(fam, lam, m, X)
    else:
        labels, idx = np.unique(data.groups, return_inverse=True)
        sizes = np.bincount(idx).astype(float)
        cell_sums = np.bincount(idx, weights=m)
        cell_logz = np.array(
            [
                dy_log_normconst(fam, lam * nj, lam * cj)
                for cj, nj in zip(cell_sums, sizes)
            ]
        )
        logz = float(cell_logz.sum())

    if not np.isfinite(lp_kern + float(hj.sum()) - logz):
        raise DomainError("joint log posterior not finite at initialization")

    # Proposal state.
    w0 = fam.cumulant_curvature(eta)
    try:
        cov0 = np.linalg.inv((1.0 + lam) * ((X.T * w0) @ X))
    except np.linalg.LinAlgError:
        cov0 = np.eye(p)
    adapter = _BlockAdapter(cov0, target=0.234)
    s_m = _mt_scale_init(fam, lam0, mu0)
    gamma_domain = fam.kind == "gamma"

    sweeps = cfg.n_warmup + cfg.n_keep * cfg.thinning
    kept = np.empty((cfg.n_keep, p + n))
    lp_trace = np.empty(cfg.n_keep)
    k_out = 0
    acc_b = tot_b = 0
    acc_m = tot_m = 0

    for t in range(sweeps):
        warm = t < cfg.n_warmup
        # -- beta block ------------------------------------------------
        for _ in range(cfg.beta_updates_per_sweep):
            prop = adapter.propose(beta, rng)
            eta_p = X @ prop
            if gamma_domain and not np.all(eta_p < 0):
                lp_p = -np.inf
                eta_p = bsum_p = None
            else:
                bsum_p = float(np.sum(fam.cumulant(eta_p)))
                lp_p = float((y + lam * m) @ eta_p - (1.0 + lam) * bsum_p)
            logr = lp_p - lp_kern
            acc_prob = math.exp(min(0.0, logr)) if np.isfinite(logr) else 0.0
            tot_b += 1
            if math.log(rng.random()) < logr:
                beta, eta, bsum, lp_kern = prop, eta_p, bsum_p, lp_p
                acc_b += 1
            if warm:
                adapter.adapt(t, beta, acc_prob)
        # -- m components ------------------------------------------------
        g_t = _rm_gamma(t)
        kind = fam.kind
        for i in range(n):
            mt_i = mt[i] + s_m[i] * rng.standard_normal()
            mi_p = _invert_mt_scalar(kind, mt_i)
            degenerate = not math.isfinite(mi_p) or (
                kind == "bernoulli" and (mi_p <= 0.0 or mi_p >= 1.0)
            ) or (kind in ("poisson", "gamma") and mi_p <= 0.0)
            if degenerate:
                tot_m += 1
                if warm:
                    s_m[i] *= math.exp(g_t * (0.0 - 0.44))
                continue
            d_m = mi_p - m[i]
            d_kern = lam * d_m * eta[i]
            hj_p = float(
                _hyper_plus_jac_terms(
                    fam, np.array([mt_i]), lam0[i : i + 1], mu0[i : i + 1]
                )[0]
            )
            if laplace:
                if normal_fast:
                    d_quad = 2.0 * d_m * hm[i] + hat[i, i] * d_m * d_m
                    logz_p = logz + 0.5 * lam * d_quad
                    bhat_p = None
                else:
                    m_p = m.copy()
                    m_p[i] = mi_p
                    logz_p, bhat_p = _laplace_logz(fam, lam, m_p, X, bhat)
            else:
                j = idx[i]
                cj_new = cell_sums[j] + d_m
                cell_logz_j = dy_log_normconst(fam, lam * sizes[j], lam * cj_new)
                logz_p = logz + (cell_logz_j - cell_logz[j])
            logr = d_kern + (hj_p - hj[i]) - (logz_p - logz)
            acc_prob = math.exp(min(0.0, logr)) if np.isfinite(logr) else 0.0
            tot_m += 1
            if math.log(rng.random()) < logr:
                mt[i] = mt_i
                m[i] = mi_p
                hj[i] = hj_p
                lp_kern += d_kern
                logz = logz_p
                if laplace:
                    if normal_fast:
                        hm = hm + d_m * hat[:, i]
                    else:
                        bhat = bhat_p
                else:
                    cell_sums[j] = cj_new
                    cell_logz[j] = cell_logz_j
                acc_m += 1
            if warm:
                s_m[i] *= math.exp(g_t * (acc_prob - 0.44))
        # Refresh running caches once per sweep to stop float drift.
        lp_kern = float((y + lam * m) @ eta - (1.0 + lam) * bsum)
        if normal_fast:
            hm = hat @ m
            logz = logz_const + 0.5 * lam * float(m @ hm)
        if t == cfg.n_warmup - 1 and cfg.n_warmup >= 200:
            rate = (acc_b + acc_m) / max(tot_b + tot_m, 1)
            if rate < 0.001:
                raise StuckChainError(
                    f"chain (seed {chain_seed}) accepted {rate:.2e} of warmup proposals"
                )
        if not warm and (t - cfg.n_warmup) % cfg.thinning == cfg.thinning - 1:
            kept[k_out, :p] = beta
            kept[k_out, p:] = m
            lp_trace[k_out] = lp_kern + float(hj.sum()) - logz
            k_out += 1

    detail = {
        "beta_block": acc_b / max(tot_b, 1),
        "m_components": acc_m / max(tot_m, 1),
    }
    overall = (acc_b + acc_m) / max(tot_b + tot_m, 1)
    return kept, lp_trace, overall, detail


def _sample_beta_rw(model: BetaPosteriorModel, cfg: SamplerConfig, rng, chain_seed):
    p = model.dim
    beta = model.initial_point().copy()
    lp = model.log_density(beta)
    if not np.isfinite(lp):
        raise DomainError("log posterior not finite at initialization")
    fam = model.family
    X = model.data.X
    w0 = fam.cumulant_curvature(X @ beta)
    scale = 1.0
    if isinstance(model.prior, CiPrior):
        scale = 1.0 + model.prior.lam
    try:
        cov0 = np.linalg.inv(scale * ((X.T * w0) @ X))
    except np.linalg.LinAlgError:
        cov0 = np.eye(p)
    adapter = _BlockAdapter(cov0, target=0.234)

    iters = cfg.n_warmup + cfg.n_keep * cfg.thinning
    kept = np.empty((cfg.n_keep, p))
    lp_trace = np.empty(cfg.n_keep)
    k_out = 0
    acc = tot = 0
    for t in range(iters):
        warm = t < cfg.n_warmup
        prop = adapter.propose(beta, rng)
        lp_p = model.log_density(prop)
        logr = lp_p - lp
        acc_prob = math.exp(min(0.0, logr)) if np.isfinite(logr) else 0.0
        tot += 1
        if math.log(rng.random()) < logr:
            beta, lp = prop, lp_p
            acc += 1
        if warm:
            adapter.adapt(t, beta, acc_prob)
            if t == cfg.n_warmup - 1 and cfg.n_warmup >= 200 and acc / tot < 0.001:
                raise StuckChainError(
                    f"chain (seed {chain_seed}) accepted {acc / tot:.2e} of warmup proposals"
                )
        elif (t - cfg.n_warmup) % cfg.thinning == cfg.thinning - 1:
            kept[k_out] = beta
            lp_trace[k_out] = lp
            k_out += 1
    rate = acc / max(tot, 1)
    return kept, lp_trace, rate, {"beta_block": rate}


# -- Hamiltonian Monte Carlo with finite-difference normalizer gradient --------


class _HmcTarget:
    """Adapter exposing log density and gradient over the flat state vector."""

    def __init__(self, model):
        self.model = model
        if isinstance(model, HppModel):
            self.p = model.data.p
            self.n = model.data.n
        else:
            self.p = model.dim
            self.n = 0

    def initial(self):
        if isinstance(self.model, HppModel):
            beta, mt = self.model.initial_point()
            return np.concatenate([beta, mt])
        return self.model.initial_point().copy()

    def logp(self, z):
        if isinstance(self.model, HppModel):
            return self.model.log_posterior_mt(z[: self.p], z[self.p :])
        return self.model.log_density(z)

    def grad(self, z):
        model = self.model
        if not isinstance(model, HppModel):
            return model.grad_log_density(z)
        beta, mt = z[: self.p], z[self.p :]
        fam = model.family
        m = inverse_transform_m(fam, mt)
        data = model.data
        lam = model.lam
        eta = fam.check_canonical(data.X @ beta)
        g_beta = data.X.T @ (data.y + lam * m - (1.0 + lam) * fam.to_mean(eta))
        if fam.kind == "bernoulli":
            dm_dmt = m * (1.0 - m)
        elif fam.kind in ("poisson", "gamma"):
            dm_dmt = m
        else:
            dm_dmt = np.ones_like(m)
        g_mt = lam * eta * dm_dmt + _hyper_plus_jac_grad(
            fam, mt, model.hyper.lambda0, model.hyper.mu0
        )
        if model.normconst == "laplace":
            g_mt -= model.grad_mt_logz_fd(mt)
        else:
            from .kernels import categorical_dlogz_dm

            g_mt -= categorical_dlogz_dm(lam, m, data.groups, fam) * dm_dmt
        return np.concatenate([g_beta, g_mt])


def _find_epsilon(target: _HmcTarget, z, rng):
    eps = 0.1
    lp0 = target.logp(z)
    g0 = target.grad(z)
    mom = rng.standard_normal(z.size)
    for _ in range(40):
        mom_h = mom + 0.5 * eps * g0
        z_new = z + eps * mom_h
        lp1 = target.logp(z_new)
        if np.isfinite(lp1):
            mom_new = mom_h + 0.5 * eps * target.grad(z_new)
            log_ratio = lp1 - lp0 - 0.5 * (mom_new @ mom_new - mom @ mom)
            if -math.log(4.0) < log_ratio < math.log(4.0):
                return eps
            eps = eps * 2.0 if log_ratio > 0 else eps * 0.5
        else:
            eps *= 0.5
    return eps


def _sample_hmc(model, cfg: SamplerConfig, rng, chain_seed):
    target = _HmcTarget(model)
    z = target.initial()
    lp = target.logp(z)
    if not np.isfinite(lp):
        raise DomainError("log posterior not finite at initialization")
    dim = z.size
    eps = _find_epsilon(target, z, rng)
    mu = math.log(10.0 * eps)
    log_eps_bar, h_bar = 0.0, 0.0
    t0, gamma, kappa = 10.0, 0.05, 0.75

    iters = cfg.n_warmup + cfg.n_keep * cfg.thinning
    kept = np.empty((cfg.n_keep, dim))
    lp_trace = np.empty(cfg.n_keep)
    k_out = 0
    acc_sum = 0.0
    tot = 0
    grad = target.grad(z)
    for t in range(iters):
        warm = t < cfg.n_warmup
        mom = rng.standard_normal(dim)
        z_new, g_new = z.copy(), grad.copy()
        mom_new = mom + 0.5 * eps * g_new
        diverged = False
        for step in range(cfg.leapfrog_steps):
            z_new = z_new + eps * mom_new
            lp_new = target.logp(z_new)
            if not np.isfinite(lp_new):
                diverged = True
                break
            g_new = target.grad(z_new)
            if step < cfg.leapfrog_steps - 1:
                mom_new = mom_new + eps * g_new
        if diverged:
            acc_prob = 0.0
        else:
            mom_new = mom_new + 0.5 * eps * g_new
            log_ratio = lp_new - lp - 0.5 * (mom_new @ mom_new - mom @ mom)
            acc_prob = math.exp(min(0.0, log_ratio))
            if math.log(rng.random()) < log_ratio:
                z, lp, grad = z_new, lp_new, g_new
        acc_sum += acc_prob
        tot += 1
        if warm:
            frac = 1.0 / (t + 1 + t0)
            h_bar = (1.0 - frac) * h_bar + frac * (cfg.target_accept - acc_prob)
            log_eps = mu - math.sqrt(t + 1.0) / gamma * h_bar
            w = (t + 1.0) ** -kappa
            log_eps_bar = w * log_eps + (1.0 - w) * log_eps_bar
            eps = math.exp(log_eps)
            if t == cfg.n_warmup - 1:
                eps = math.exp(log_eps_bar)
                if cfg.n_warmup >= 200 and acc_sum / tot < 0.001:
                    raise StuckChainError(
                        f"chain (seed {chain_seed}) acceptance {acc_sum / tot:.2e}"
                    )
        elif (t - cfg.n_warmup) % cfg.thinning == cfg.thinning - 1:
            if isinstance(model, HppModel):
                kept[k_out, : target.p] = z[: target.p]
                kept[k_out, target.p :] = inverse_transform_m(
                    model.family, z[target.p :]
                )
            else:
                kept[k_out] = z
            lp_trace[k_out] = lp
            k_out += 1
    rate = acc_sum / max(tot, 1)
    return kept, lp_trace, rate, {"hmc_mean_accept": rate}


# -- driver ---------------------------------------------------------------------


def sample_posterior(model, cfg: SamplerConfig) -> Draws:
    """Run the configured sampler and merge chains into a Draws object."""
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_chains)
    chains = []
    traces = []
    rates = []
    details = []
    for c in range(cfg.n_chains):
        rng = np.random.default_rng(seeds[c])
        if cfg.algorithm == "hmc_fd":
            out = _sample_hmc(model, cfg, rng, c)
        elif isinstance(model, HppModel):
            out = _sample_hpp_rw(model, cfg, rng, c)
        else:
            out = _sample_beta_rw(model, cfg, rng, c)
        kept, lp_trace, rate, detail = out
        chains.append(kept)
        traces.append(lp_trace)
        rates.append(rate)
        details.append(detail)
    detail_merged = {
        key: np.array([d[key] for d in details]) for key in details[0]
    }
    return Draws(
        samples=np.stack(chains),
        param_names=model.param_names(),
        log_posterior=np.stack(traces),
        acceptance_rate=np.asarray(rates),
        seed=cfg.seed,
        algorithm=cfg.algorithm,
        acceptance_detail=detail_merged,
    )


# -- convergence diagnostics -----------------------------------------------------


def _ess_single(x: np.ndarray) -> float:
    """Geyer initial-monotone-sequence ESS for one chain."""
    n = x.size
    if n < 4:
        return float(n)
    x = x - x.mean()
    var0 = float(x @ x) / n
    if var0 == 0.0:
        return float(n)
    f = np.fft.rfft(x, 2 * n)
    acov = np.fft.irfft(f * np.conj(f))[:n] / n
    rho = acov / acov[0]
    tau = -1.0
    prev = np.inf
    for j in range(n // 2):
        pair = rho[2 * j] + rho[2 * j + 1]
        if pair <= 0.0:
            break
        pair = min(pair, prev)
        prev = pair
        tau += 2.0 * pair
    return n / max(tau, 1e-12)


def _split_rhat(chains_2d: np.ndarray):
    """Split R-hat over (n_chains, n_kept); None when a split is impossible."""
    c, k = chains_2d.shape
    half = k // 2
    if half < 2:
        return None
    seqs = np.vstack([chains_2d[:, :half], chains_2d[:, k - half :]])
    within = seqs.var(axis=1, ddof=1).mean()
    between = half * seqs.mean(axis=1).var(ddof=1)
    if within == 0.0:
        return 1.0 if between == 0.0 else float("inf")
    var_plus = (half - 1.0) / half * within + between / half
    return float(np.sqrt(var_plus / within))


def diagnostics(draws: Draws) -> dict:
    """Per-coordinate effective sample size and split R-hat.

    ESS sums the per-chain initial-monotone-sequence estimates and may
    exceed the number of draws for antithetic chains.  R-hat is None when
    the chains are too short to split.
    """
    c, k, d = draws.samples.shape
    ess = np.empty(d)
    rhat = np.empty(d)
    rhat_defined = True
    for j in range(d):
        ess[j] = sum(_ess_single(draws.samples[ch, :, j]) for ch in range(c))
        r = _split_rhat(draws.samples[:, :, j])
        if r is None:
            rhat_defined = False
        else:
            rhat[j] = r
    return {"ess": ess, "rhat": rhat if rhat_defined else None}
