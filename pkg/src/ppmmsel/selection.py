"""Logistic selection model equivalent to an identified PPMM.

For two normal patterns the Bayes log-odds of nonresponse is a quadratic
polynomial. With a covariate the joint density factors as
``f(x) * f(y | x)``, so the six coefficients split into an X-only part (the
``tau`` polynomial) plus the contribution of the conditional normals of Y
given X, whose means are linear in x.

Conventions
-----------
* The modelled event is nonresponse, ``R = 0``.
* The conditional slope is ``cov_xy / var_x``. Writing it as ``sd_y / sd_x``
  would only be right for perfectly correlated patterns.
* The conditional log-variance term enters as ``0.5 * log(s1 / s0)``, i.e.
  with the same orientation as the marginal term in ``tau0``.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from ._validation import check_probability
from .exceptions import NotStrictlyPositiveResidual
from .identification import IdentifiedModel
from .moments import PatternMoments

LOGIT_CLIP = 700.0
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ConditionalParams:
    """``E[Y | X] = beta + alpha * X`` and ``Var[Y | X] = resid_var`` within one pattern."""

    alpha: float
    beta: float
    resid_var: float


@dataclass(frozen=True)
class SelectionCoefficients:
    """Coefficients of ``logit P(R=0 | x, y)`` on ``1, x, x^2, y, xy, y^2``."""

    lambda0: float
    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    lambda5: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self))

    def to_dict(self) -> dict:
        return {f"lambda{i}": v for i, v in enumerate(astuple(self))}

    def __post_init__(self):
        if not all(math.isfinite(v) for v in astuple(self)):
            raise ValueError(f"non-finite selection coefficient in {self}")


@dataclass(frozen=True)
class MarginalSelectionCoefficients:
    """``logit P(R=0 | x) = tau0 + tau1 x + tau2 x^2``."""

    tau0: float
    tau1: float
    tau2: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self))


@dataclass(frozen=True)
class NoCovariateCoefficients:
    """``logit P(R=0 | y) = gamma0 + gamma1 y + gamma2 y^2``."""

    gamma0: float
    gamma1: float
    gamma2: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self))


TERM_NAMES = ("intercept", "x", "x^2", "y", "xy", "y^2")


def conditional_params(m: PatternMoments) -> ConditionalParams:
    alpha = m.cov_xy / m.var_x
    resid = m.var_y - m.cov_xy ** 2 / m.var_x
    if not resid > 1e-14 * m.var_y:
        raise NotStrictlyPositiveResidual(
            f"conditional variance {resid:.3g} is not positive for {m}"
        )
    return ConditionalParams(alpha=alpha, beta=m.mu_y - alpha * m.mu_x, resid_var=resid)


def _normal_ratio_terms(mu1, var1, mu0, var0):
    """Quadratic coefficients of ``log f0(t) - log f1(t)`` for univariate normals."""
    _check_var(var1)
    _check_var(var0)
    c0 = mu1 ** 2 / (2 * var1) - mu0 ** 2 / (2 * var0) + 0.5 * math.log(var1 / var0)
    c1 = mu0 / var0 - mu1 / var1
    c2 = 1 / (2 * var1) - 1 / (2 * var0)
    return c0, c1, c2


def _check_var(v):
    if not v > 0:
        raise ValueError(f"variance must be positive, got {v}")


def _log_odds(pi):
    pi = check_probability(pi)
    return math.log((1 - pi) / pi)


def gamma_coefficients(pi, resp_y, nonresp_y) -> NoCovariateCoefficients:
    """Selection model for an outcome with no covariate.

    ``resp_y`` and ``nonresp_y`` are ``(mean, variance)`` pairs.
    """
    c0, c1, c2 = _normal_ratio_terms(*resp_y, *nonresp_y)
    return NoCovariateCoefficients(_log_odds(pi) + c0, c1, c2)


def tau_coefficients(pi, resp_x, nonresp_x) -> MarginalSelectionCoefficients:
    """Selection model on the proxy alone; ``(mean, variance)`` pairs as in :func:`gamma_coefficients`."""
    c0, c1, c2 = _normal_ratio_terms(*resp_x, *nonresp_x)
    return MarginalSelectionCoefficients(_log_odds(pi) + c0, c1, c2)


def conditional_contribution(model: IdentifiedModel) -> np.ndarray:
    """Coefficients (on 1, x, x^2, y, xy, y^2) from the ratio of the Y|X normals."""
    c1 = conditional_params(model.respondent)
    c0 = conditional_params(model.nonrespondent)
    s1, s0 = c1.resid_var, c0.resid_var
    return np.array([
        c1.beta ** 2 / (2 * s1) - c0.beta ** 2 / (2 * s0) + 0.5 * math.log(s1 / s0),
        c1.beta * c1.alpha / s1 - c0.beta * c0.alpha / s0,
        c1.alpha ** 2 / (2 * s1) - c0.alpha ** 2 / (2 * s0),
        c0.beta / s0 - c1.beta / s1,
        c0.alpha / s0 - c1.alpha / s1,
        1 / (2 * s1) - 1 / (2 * s0),
    ])


def lambda_coefficients(model: IdentifiedModel) -> SelectionCoefficients:
    """Six coefficients of the quadratic logistic selection model."""
    r, n = model.respondent, model.nonrespondent
    tau = tau_coefficients(model.pi, (r.mu_x, r.var_x), (n.mu_x, n.var_x))
    total = conditional_contribution(model)
    total[:3] += tau.as_array()
    return SelectionCoefficients(*(float(v) for v in total))


def logit_nonresponse(c: SelectionCoefficients, x, y):
    """``lambda0 + lambda1 x + lambda2 x^2 + lambda3 y + lambda4 xy + lambda5 y^2`` (broadcasts)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = c.lambda0 + x * (c.lambda1 + c.lambda2 * x) + y * (c.lambda3 + c.lambda4 * x + c.lambda5 * y)
    return out if out.ndim else float(out)


def expit(z):
    """Inverse logit that never overflows and stays strictly inside (0, 1)."""
    z = np.clip(np.asarray(z, dtype=float), -LOGIT_CLIP, LOGIT_CLIP)
    ez = np.exp(-np.abs(z))
    p = np.where(z >= 0, 1 / (1 + ez), ez / (1 + ez))
    p = np.clip(p, _EPS, 1 - _EPS)
    return p if p.ndim else float(p)


def prob_nonresponse(c: SelectionCoefficients, x, y):
    return expit(logit_nonresponse(c, x, y))


def odds_ratio_y(c: SelectionCoefficients, x, y, delta=1.0):
    """Odds ratio of nonresponse for moving the outcome from ``y`` to ``y + delta`` at fixed ``x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    log_or = delta * (c.lambda3 + c.lambda4 * x) + c.lambda5 * (2 * y * delta + delta * delta)
    out = np.exp(log_or)
    return out if out.ndim else float(out)
