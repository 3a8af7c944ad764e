"""Independent ground truth for the selection-model algebra.

* :func:`bvn_logpdf` and :func:`bayes_logit_oracle` compute the nonresponse
  log-odds straight from the two pattern densities by Bayes' rule, without
  going through any coefficient formulas.
* :func:`simulate` draws data from an identified pattern-mixture model.
* :func:`irls_logistic` fits a logistic regression by Newton/IRLS so the
  analytic coefficients can be checked against simulated data.

Random numbers come from NumPy's ``Philox`` counter-based bit generator
(4x64, 10 rounds) seeded with the user's 64-bit seed. Normal variates use
NumPy's ziggurat sampler. Correlation is imposed through the Cholesky factor
of the 2x2 pattern covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._linalg import spd_inverse, spd_solve
from ._validation import as_matrix, as_vector
from .exceptions import NotStrictlyPositiveDefinite, RankDeficient, Separation
from .identification import IdentifiedModel
from .moments import PatternMoments
from .selection import TERM_NAMES, expit, lambda_coefficients

_LOG_2PI = math.log(2 * math.pi)


def bvn_logpdf(m: PatternMoments, x, y):
    """Log-density of the bivariate normal with moments ``m`` (broadcasts over x, y)."""
    det = m.var_x * m.var_y - m.cov_xy ** 2
    if not (m.var_x > 0 and m.var_y > 0 and det > 0):
        raise NotStrictlyPositiveDefinite(f"covariance of {m} is not positive definite")
    dx = np.asarray(x, dtype=float) - m.mu_x
    dy = np.asarray(y, dtype=float) - m.mu_y
    quad = (m.var_y * dx * dx - 2 * m.cov_xy * dx * dy + m.var_x * dy * dy) / det
    out = -_LOG_2PI - 0.5 * math.log(det) - 0.5 * quad
    return out if np.ndim(out) else float(out)


def bayes_logit_oracle(model: IdentifiedModel, x, y):
    """``log[(1 - pi) f0(x, y)] - log[pi f1(x, y)]``."""
    out = (
        math.log((1 - model.pi) / model.pi)
        + bvn_logpdf(model.nonrespondent, x, y)
        - bvn_logpdf(model.respondent, x, y)
    )
    return out


def make_rng(seed: int) -> np.random.Generator:
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class SimulatedDataset:
    x: np.ndarray
    y: np.ndarray
    r: np.ndarray  # 1 = respondent
    seed: int
    mechanism_id: str = ""

    def __len__(self):
        return self.x.shape[0]

    def to_csv(self, path) -> None:
        """Write columns ``x, y, r`` with full float precision."""
        with open(path, "w", newline="") as fh:
            fh.write("x,y,r\n")
            for xi, yi, ri in zip(self.x, self.y, self.r):
                fh.write(f"{float(xi)!r},{float(yi)!r},{int(ri)}\n")


def simulate(model: IdentifiedModel, n: int, seed: int, mechanism_id: str = "") -> SimulatedDataset:
    """Draw ``R ~ Bernoulli(pi)`` then ``(X, Y) | R`` from that pattern's normal."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = make_rng(seed)
    r = (rng.random(n) < model.pi).astype(np.int8)
    z = rng.standard_normal((n, 2))
    x = np.empty(n)
    y = np.empty(n)
    for flag, m in ((1, model.respondent), (0, model.nonrespondent)):
        sel = r == flag
        sx = math.sqrt(m.var_x)
        slope = m.cov_xy / sx
        resid = m.var_y - slope * slope
        if not resid > 0:
            raise NotStrictlyPositiveDefinite(f"covariance of {m} is not positive definite")
        x[sel] = m.mu_x + sx * z[sel, 0]
        y[sel] = m.mu_y + slope * z[sel, 0] + math.sqrt(resid) * z[sel, 1]
    return SimulatedDataset(x, y, r, int(seed), str(mechanism_id))


# ---------------------------------------------------------------------------
# Logistic regression by IRLS


@dataclass
class LogisticFit:
    coefficients: np.ndarray
    standard_errors: np.ndarray
    converged: bool
    iterations: int
    deviance_history: list = field(default_factory=list)
    ridge_used: bool = False


def _deviance(eta, response):
    return 2.0 * float(np.sum(np.logaddexp(0.0, eta) - response * eta))


def irls_logistic(features, response, max_iter: int = 50, tol: float = 1e-10,
                  max_coef_norm: float = 1e3) -> LogisticFit:
    """Maximum-likelihood logistic regression by iteratively reweighted least squares.

    ``features`` is used as given; include a column of ones for an intercept.
    Each Newton step is halved until the deviance does not increase, so the
    recorded deviance sequence is non-increasing. Convergence is declared when
    the largest absolute score is below ``tol`` or the relative deviance change
    is. Failing to converge within ``max_iter`` is reported through
    ``converged=False``, not raised.

    Raises
    ------
    RankDeficient
        ``features`` is not of full column rank.
    Separation
        The coefficient norm exceeds ``max_coef_norm`` or the deviance collapses
        to zero, i.e. the MLE does not exist.
    """
    X = as_matrix(features, "features")
    t = as_vector(response, "response")
    if X.shape[0] != t.shape[0]:
        raise ValueError("features and response lengths differ")
    if not np.all((t == 0) | (t == 1)):
        raise ValueError("response must be binary 0/1")
    if t.min() == t.max():
        raise ValueError("response is constant; logistic MLE does not exist")
    spd_solve(X.T @ X, np.zeros(X.shape[1]))  # rank check, raises RankDeficient

    n = X.shape[0]
    beta = np.zeros(X.shape[1])
    eta = X @ beta
    dev = _deviance(eta, t)
    history = [dev]
    ridge_used = False
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        p = expit(eta)
        w = p * (1 - p)
        score = X.T @ (t - p)
        info = X.T @ (X * w[:, None])
        try:
            step, _, _ = spd_solve(info, score)
        except RankDeficient:
            step, _, _ = spd_solve(info, score, ridge=1e-8)
            ridge_used = True
        for _ in range(60):
            cand = beta + step
            cand_eta = X @ cand
            cand_dev = _deviance(cand_eta, t)
            if cand_dev <= dev:
                break
            step = step / 2
        else:
            cand, cand_eta, cand_dev = beta, eta, dev
        rel_change = abs(dev - cand_dev) / max(abs(cand_dev), 1e-300)
        beta, eta, dev = cand, cand_eta, cand_dev
        history.append(dev)
        if np.linalg.norm(beta) > max_coef_norm or dev < 1e-8 * n:
            raise Separation(
                f"logistic MLE diverges (|beta|={np.linalg.norm(beta):.3g}, deviance={dev:.3g})"
            )
        max_score = float(np.max(np.abs(X.T @ (t - expit(eta)))))
        if max_score < tol or rel_change < tol:
            converged = True
            break

    p = expit(eta)
    info = X.T @ (X * (p * (1 - p))[:, None])
    try:
        _, low, scale = spd_solve(info, np.zeros(X.shape[1]))
    except RankDeficient:
        _, low, scale = spd_solve(info, np.zeros(X.shape[1]), ridge=1e-8)
        ridge_used = True
    se = np.sqrt(np.diag(spd_inverse(low, scale)))
    return LogisticFit(beta, se, converged, it, history, ridge_used)


class LogisticIRLS(ClassifierMixin, BaseEstimator):
    """Unpenalized logistic regression fitted by :func:`irls_logistic`.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    intercept_ : float
    standard_errors_ : ndarray
        Standard errors of ``[intercept_, *coef_]`` (intercept first when fitted).
    converged_ : bool
    n_iter_ : int
    """

    def __init__(self, fit_intercept: bool = True, max_iter: int = 50, tol: float = 1e-10):
        self.fit_intercept = fit_intercept
        self.max_iter = max_iter
        self.tol = tol

    def _design(self, X):
        X = as_matrix(X, "X")
        return np.column_stack([np.ones(X.shape[0]), X]) if self.fit_intercept else X

    def fit(self, X, y):
        y = np.asarray(y)
        if y.ndim != 1:
            raise ValueError("y must be one-dimensional")
        self.classes_ = np.unique(y)
        if self.classes_.shape[0] != 2:
            raise ValueError("LogisticIRLS needs exactly two classes")
        target = (y == self.classes_[1]).astype(float)
        A = self._design(X)
        fit = irls_logistic(A, target, max_iter=self.max_iter, tol=self.tol)
        if self.fit_intercept:
            self.intercept_ = float(fit.coefficients[0])
            self.coef_ = fit.coefficients[1:]
        else:
            self.intercept_ = 0.0
            self.coef_ = fit.coefficients
        self.standard_errors_ = fit.standard_errors
        self.converged_ = fit.converged
        self.n_iter_ = fit.iterations
        self.n_features_in_ = A.shape[1] - int(self.fit_intercept)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        return as_matrix(X, "X") @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        p1 = expit(self.decision_function(X))
        return np.column_stack([1 - p1, p1])

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0).astype(int)]


def quadratic_features(x, y) -> np.ndarray:
    """Columns ``1, x, x^2, y, xy, y^2``, matching the selection-coefficient order."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.column_stack([np.ones_like(x), x, x * x, y, x * y, y * y])


def mc_recover_lambdas(model: IdentifiedModel, n: int, seed: int, mechanism_id: str = ""):
    """Simulate ``n`` units, fit the quadratic logistic model for ``R = 0`` and compare.

    Returns ``(fit, report)`` where ``report`` is a list of
    ``{name, analytic, estimate, se, z}`` records, one per coefficient.
    """
    if n < 10_000:
        raise ValueError("n must be at least 10^4 for a meaningful comparison")
    data = simulate(model, n, seed, mechanism_id)
    fit = irls_logistic(quadratic_features(data.x, data.y), 1 - data.r)
    analytic = lambda_coefficients(model).as_array()
    report = []
    for name, a, est, se in zip(TERM_NAMES, analytic, fit.coefficients, fit.standard_errors):
        report.append({
            "name": name,
            "analytic": float(a),
            "estimate": float(est),
            "se": float(se),
            "z": float((est - a) / se),
        })
    return fit, report
