"""Independent quadrature/MC oracles used by the tests.

These deliberately avoid the library's closed-form normalizing constants
and hyperprior densities: integrals run over the canonical parameter with
plain scipy quadrature, and hyperprior densities come from scipy.stats
frozen distributions, so oracle and implementation share no code path.
"""

import numpy as np
from scipy import integrate, stats
from scipy.special import expit


def cumulant_np(kind, theta):
    theta = np.asarray(theta, dtype=float)
    if kind == "bernoulli":
        return np.logaddexp(0.0, theta)
    if kind == "poisson":
        return np.exp(theta)
    if kind == "gamma":
        return -np.log(-theta)
    return 0.5 * theta**2


def mean_np(kind, theta):
    theta = np.asarray(theta, dtype=float)
    if kind == "bernoulli":
        return expit(theta)
    if kind == "poisson":
        return np.exp(theta)
    if kind == "gamma":
        return -1.0 / theta
    return theta


THETA_RANGE = {
    "bernoulli": (-60.0, 60.0),
    "poisson": (-60.0, 30.0),
    "normal": (-60.0, 60.0),
}


def theta_integral(kind, log_f):
    """(value, shift) with integral = value * exp(shift) of exp(log_f(theta)).

    The gamma family integrates over s = -1/theta in (0, inf) with the
    Jacobian ds/s^2; the others integrate theta directly.
    """
    if kind == "gamma":

        def log_g(s):
            return log_f(-1.0 / s) - 2.0 * np.log(s)

        sgrid = np.geomspace(1e-6, 1e6, 2001)
        shift = max(log_g(s) for s in sgrid)
        val, _ = integrate.quad(lambda s: np.exp(log_g(s) - shift), 1e-12, np.inf, limit=400)
        return val, shift
    lo, hi = THETA_RANGE[kind]
    tgrid = np.linspace(lo, hi, 4001)
    logs = np.array([log_f(t) for t in tgrid])
    shift = float(logs.max())
    peak = float(tgrid[int(np.argmax(logs))])
    val, _ = integrate.quad(
        lambda t: np.exp(log_f(t) - shift), lo, hi, limit=400, points=[peak]
    )
    return val, shift


def dy_posterior_mean_mu(kind, n, ybar, lam, m):
    """Posterior mean of mu under the conjugate update, by theta-quadrature."""
    a = lam + n
    c = lam * m + n * ybar

    def logpost(t):
        return c * t - a * cumulant_np(kind, t)

    z, shift = theta_integral(kind, logpost)
    if kind == "gamma":
        num, _ = integrate.quad(
            lambda s: s * np.exp(logpost(-1.0 / s) - 2.0 * np.log(s) - shift),
            1e-12,
            np.inf,
            limit=400,
        )
    else:
        lo, hi = THETA_RANGE[kind]
        num, _ = integrate.quad(
            lambda t: mean_np(kind, t) * np.exp(logpost(t) - shift), lo, hi, limit=400
        )
    return num / z


def hyper_scipy(kind, lam0, mu0):
    """The hyperprior on m as an independent scipy frozen distribution."""
    if kind == "bernoulli":
        return stats.beta(lam0 * mu0, lam0 * (1.0 - mu0))
    if kind == "poisson":
        return stats.gamma(lam0 * mu0, scale=1.0 / lam0)
    if kind == "gamma":
        return stats.invgamma(lam0 + 1.0, scale=lam0 * mu0)
    return stats.norm(mu0, np.sqrt(1.0 / lam0))


def m_posterior_mean_2d(kind, n, ybar, lam, lam0, mu0, m_bounds):
    """Posterior mean of m by nested quadrature of the joint over (theta, m).

    The inner theta-integral is numeric, so no closed-form Z enters.
    """
    hyper = hyper_scipy(kind, lam0, mu0)

    def log_inner(a, c_coef):
        def logf(t):
            return c_coef * t - a * cumulant_np(kind, t)

        val, shift = theta_integral(kind, logf)
        if val <= 0.0:
            return -np.inf
        return np.log(val) + shift

    def log_mdens(m):
        num = log_inner(lam + n, lam * m + n * ybar)
        den = log_inner(lam, lam * m)
        return num - den + hyper.logpdf(m)

    mlo, mhi = m_bounds
    if not np.isfinite(mhi):
        mhi = 60.0 * max(mu0, ybar, 1.0)
    mgrid = np.linspace(mlo + 1e-9, mhi - 1e-9, 161)
    logs = np.array([log_mdens(m) for m in mgrid])
    shift = float(logs.max())
    peak = float(mgrid[int(np.argmax(logs))])
    z, _ = integrate.quad(
        lambda m: np.exp(log_mdens(m) - shift), mlo, mhi, limit=200, points=[peak]
    )
    num, _ = integrate.quad(
        lambda m: m * np.exp(log_mdens(m) - shift), mlo, mhi, limit=200, points=[peak]
    )
    return num / z


def tv_distance(pdf_a, pdf_b, lo, hi):
    val, _ = integrate.quad(lambda x: abs(pdf_a(x) - pdf_b(x)), lo, hi, limit=400)
    return 0.5 * val


def normalize_log_pdf(log_pdf, lo, hi, grid):
    """Turn an unnormalized log density into a normalized pdf callable."""
    logs = np.array([log_pdf(x) for x in grid])
    shift = float(logs.max())
    peak = float(np.asarray(grid)[int(np.argmax(logs))])
    if not np.isfinite(hi):
        hi = 40.0 * max(peak, 1.0)
    z, _ = integrate.quad(
        lambda x: np.exp(log_pdf(x) - shift), lo, hi, limit=400, points=[peak]
    )

    def pdf(x):
        return np.exp(log_pdf(x) - shift) / z

    return pdf
