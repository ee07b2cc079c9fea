"""Bayesian GLMs with hierarchical prediction priors.

Conjugate exponential-family priors over mean predictions, their
hierarchical extension with a hyperprior on the prediction vector, power
and Gaussian power priors for historical borrowing, exact normal-linear
closed forms, and MCMC with Laplace-approximated normalizing constants.
"""

from .elicit import (
    ElicitationResult,
    HistoricalSummary,
    build_hpp_from_summary,
    delta_method_tau,
    lambda0_from_tau,
    summary_from_data,
)
from .errors import (
    ApproximationUnavailableError,
    ConfigError,
    DataError,
    DomainError,
    FitError,
    HppglmError,
    InfeasibleVarianceError,
    InsufficientDrawsError,
    PrecisionError,
    SingularMatrixError,
    StuckChainError,
    UnsupportedDesignError,
)
from .families import (
    Family,
    MeanDomain,
    cumulant,
    get_family,
    log_likelihood,
    mean_canonical_bijection,
    variance_function,
)
from .iid import (
    DyPrior,
    Hyperprior,
    MixtureApprox,
    StandardDensity,
    dy_log_kernel,
    dy_log_normconst,
    dy_update,
    hyper_log_pdf,
    hyperprior_standard_form,
    iid_power_prior_log_kernel,
    limiting_m_posterior,
    m_log_posterior,
    m_posterior_moments,
)
from .irls import FitResult, irls, mle_with_se
from .kernels import (
    CiPrior,
    GlmData,
    GppConfig,
    HppHyper,
    PowerPriorConfig,
    ci_log_kernel,
    ci_log_kernel_grad,
    exact_log_normconst_categorical,
    gpp_log_kernel,
    gpp_log_kernel_grad,
    hpp_hyper_log_pdf,
    hpp_hyper_log_pdf_grad,
    joint_log_posterior,
    joint_log_posterior_grad_beta,
    joint_log_posterior_grad_m,
    laplace_log_normconst,
    mu0_from_coefficients,
    power_prior_log_kernel,
    power_prior_log_kernel_grad,
)
from .linear import (
    GaussianMoments,
    effective_precision,
    lm_beta_posterior,
    lm_joint_prior,
    lm_m_posterior,
    sample_lm_hpp_joint,
)
from .sampling import (
    BetaPosteriorModel,
    Draws,
    HppModel,
    SamplerConfig,
    diagnostics,
    inverse_transform_m,
    sample_posterior,
    transform_m,
)
from .simulate import SimSpec, simulate_pair
from .summarize import SummaryRow, format_table, hpd_interval, summarize

__version__ = "0.1.0"
