"""Proxy pattern-mixture models for nonignorable nonresponse, and their logistic selection-model form."""

__version__ = "0.1.0"

from .estimator import ProxyPatternMixture
from .exceptions import (
    DegenerateProxy,
    InsufficientPattern,
    InvalidIdentification,
    NonPositiveVariance,
    NotPositiveDefinite,
    PPMMError,
    RankDeficientDesign,
    Separation,
)
from .identification import IdentifiedModel, g_factor, identify, marginal_mean, phi_validity_bound
from .mechanisms import Mechanism, builtin_mechanisms, get_mechanism, load_mechanism
from .moments import (
    DesignEncoder,
    ObservedSummary,
    PatternMoments,
    ProxyRegressor,
    encode_design,
    fit_proxy,
    summarize,
    summary_from_ols_proxy,
    validate_pattern_moments,
)
from .selection import (
    SelectionCoefficients,
    conditional_params,
    gamma_coefficients,
    lambda_coefficients,
    logit_nonresponse,
    odds_ratio_y,
    prob_nonresponse,
    tau_coefficients,
)
from .simulation import (
    LogisticIRLS,
    bayes_logit_oracle,
    bvn_logpdf,
    irls_logistic,
    mc_recover_lambdas,
    simulate,
)
from .sweeps import CurveSeries, sweep_mean, sweep_or, sweep_prob
