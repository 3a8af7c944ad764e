"""Scikit-learn style front end for the proxy pattern-mixture model."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_matrix, as_vector, check_phi
from .identification import identify, marginal_mean, phi_validity_bound
from .moments import ProxyRegressor, summarize
from .selection import lambda_coefficients, logit_nonresponse, odds_ratio_y, prob_nonresponse


class ProxyPatternMixture(TransformerMixin, BaseEstimator):
    """Proxy pattern-mixture model with its equivalent logistic selection model.

    ``fit`` takes a numeric covariate matrix for all sampled units and the
    outcome with ``NaN`` marking nonrespondents. The proxy is the OLS
    prediction of the outcome from the covariates among respondents.
    Categorical covariates should go through
    :class:`~ppmmsel.moments.DesignEncoder` first.

    Parameters
    ----------
    phi : float, default 0.5
        Sensitivity parameter in [0, 1]; 0 is missing at random.
    ddof : int, default 1
        Variance denominator offset for the pattern moments.

    Attributes
    ----------
    proxy_ : ProxyRegressor
    summary_ : ObservedSummary
    model_ : IdentifiedModel
    coefficients_ : SelectionCoefficients
        Logit of nonresponse on ``1, x, x^2, y, xy, y^2`` with x the proxy.
    marginal_mean_ : float
    respondent_mean_ : float
    phi_bound_ : tuple of float
        Largest ``[0, phi_max]`` (grid step 0.01) on which the model is identified.

    Examples
    --------
    >>> est = ProxyPatternMixture(phi=0.5).fit(Z, y)  # doctest: +SKIP
    >>> est.marginal_mean_ - est.respondent_mean_      # doctest: +SKIP
    """

    def __init__(self, phi: float = 0.5, ddof: int = 1):
        self.phi = phi
        self.ddof = ddof

    def fit(self, X, y):
        phi = check_phi(self.phi)
        X = as_matrix(X, "X")
        y = as_vector(y, "y", allow_nan=True)
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        observed = ~np.isnan(y)
        self.proxy_ = ProxyRegressor().fit(X[observed], y[observed])
        self.summary_ = summarize(self.proxy_.predict(X), y, ddof=self.ddof)
        self.phi_bound_ = phi_validity_bound(self.summary_, 0.01)
        self.model_ = identify(self.summary_, phi)
        self.coefficients_ = lambda_coefficients(self.model_)
        self.marginal_mean_ = marginal_mean(self.model_)
        self.respondent_mean_ = self.summary_.respondent.mu_y
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """Proxy values for the rows of ``X``."""
        check_is_fitted(self, "model_")
        return self.proxy_.predict(X)

    def decision_function(self, X, y):
        """Log-odds of nonresponse given covariates and (hypothetical) outcome values."""
        return logit_nonresponse(self.coefficients_, self.transform(X), as_vector(y, "y"))

    def nonresponse_proba(self, X, y):
        return prob_nonresponse(self.coefficients_, self.transform(X), as_vector(y, "y"))

    def odds_ratio(self, X, y, delta: float = 1.0):
        return odds_ratio_y(self.coefficients_, self.transform(X), as_vector(y, "y"), delta)
