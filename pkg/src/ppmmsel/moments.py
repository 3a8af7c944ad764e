"""Pattern moments, proxy construction and observed-data summaries.

The proxy is the OLS prediction of the outcome from fully observed
covariates, fitted on respondents and evaluated for every sampled unit.
Everything downstream works from five moments per response pattern, held in
:class:`PatternMoments`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._linalg import PIVOT_TOL, spd_solve
from ._validation import as_matrix, as_vector, check_probability
from .exceptions import (
    EmptyColumn,
    InputError,
    InsufficientPattern,
    NonPositiveVariance,
    NotPositiveDefinite,
    RankDeficient,
    RankDeficientDesign,
)


@dataclass(frozen=True)
class PatternMoments:
    """Means, variances and covariance of (proxy X, outcome Y) in one response pattern."""

    mu_x: float
    mu_y: float
    var_x: float
    var_y: float
    cov_xy: float

    @property
    def rho(self) -> float:
        return self.cov_xy / math.sqrt(self.var_x * self.var_y)

    @property
    def sd_x(self) -> float:
        return math.sqrt(self.var_x)

    @property
    def sd_y(self) -> float:
        return math.sqrt(self.var_y)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PatternMoments":
        return cls(**{k: float(d[k]) for k in ("mu_x", "mu_y", "var_x", "var_y", "cov_xy")})


def validate_pattern_moments(m: PatternMoments) -> PatternMoments:
    """Return ``m`` unchanged if its covariance matrix is strictly positive definite."""
    values = (m.mu_x, m.mu_y, m.var_x, m.var_y, m.cov_xy)
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"pattern moments must be finite: {m}")
    if not (m.var_x > 0 and m.var_y > 0):
        raise NonPositiveVariance(f"variances must be positive: var_x={m.var_x}, var_y={m.var_y}")
    if m.cov_xy ** 2 >= m.var_x * m.var_y:
        raise NotPositiveDefinite(
            f"cov_xy^2={m.cov_xy ** 2:.6g} >= var_x*var_y={m.var_x * m.var_y:.6g}"
        )
    return m


@dataclass(frozen=True)
class ObservedSummary:
    """What the data identify: respondent (X, Y) moments, nonrespondent X moments, response rate.

    ``n_respondents`` and ``n_total`` are informational and may be ``None``
    for summaries typed in by hand. Construction does not validate (a sample
    can legitimately produce a degenerate summary); :meth:`validate` does, and
    :func:`~ppmmsel.identification.identify` calls it.
    """

    respondent: PatternMoments
    nonresp_mu_x: float
    nonresp_var_x: float
    pi: float
    n_respondents: Optional[int] = None
    n_total: Optional[int] = None

    def validate(self) -> "ObservedSummary":
        validate_pattern_moments(self.respondent)
        if not math.isfinite(self.nonresp_mu_x):
            raise ValueError("nonresp_mu_x must be finite")
        if not self.nonresp_var_x > 0:
            raise NonPositiveVariance(f"nonresp_var_x must be positive, got {self.nonresp_var_x}")
        check_probability(self.pi)
        return self

    @property
    def rho1(self) -> float:
        return self.respondent.rho

    @property
    def overall_mu_x(self) -> float:
        """Proxy mean over the full sample, the default fixed-x for odds-ratio curves."""
        return self.pi * self.respondent.mu_x + (1 - self.pi) * self.nonresp_mu_x

    def to_dict(self) -> dict:
        d = {
            "respondent": self.respondent.to_dict(),
            "nonresp_mu_x": self.nonresp_mu_x,
            "nonresp_var_x": self.nonresp_var_x,
            "pi": self.pi,
        }
        if self.n_respondents is not None:
            d["n_respondents"] = self.n_respondents
        if self.n_total is not None:
            d["n_total"] = self.n_total
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ObservedSummary":
        return cls(
            respondent=PatternMoments.from_dict(d["respondent"]),
            nonresp_mu_x=float(d["nonresp_mu_x"]),
            nonresp_var_x=float(d["nonresp_var_x"]),
            pi=float(d["pi"]),
            n_respondents=d.get("n_respondents"),
            n_total=d.get("n_total"),
        )


def summary_from_ols_proxy(mu_x1, var_x1, rho1, mu_x0, var_x0, pi) -> ObservedSummary:
    """Complete an :class:`ObservedSummary` from published proxy statistics.

    When the proxy is an OLS fit with intercept on the respondents, the fitted
    values average to the outcome mean, their covariance with the outcome equals
    their own variance, and ``rho1**2`` is the R-squared. Hence
    ``mu_y1 = mu_x1``, ``cov_xy1 = var_x1`` and ``var_y1 = var_x1 / rho1**2``.
    """
    if not 0 < rho1 < 1:
        raise ValueError("rho1 must lie in (0, 1)")
    resp = PatternMoments(
        mu_x=float(mu_x1),
        mu_y=float(mu_x1),
        var_x=float(var_x1),
        var_y=float(var_x1) / rho1 ** 2,
        cov_xy=float(var_x1),
    )
    return ObservedSummary(resp, float(mu_x0), float(var_x0), float(pi)).validate()


def summarize(proxy, y, ddof: int = 1) -> ObservedSummary:
    """Split units by whether ``y`` is observed (non-NaN) and compute pattern moments.

    Parameters
    ----------
    proxy : array-like, shape (n,)
        Proxy value for every unit.
    y : array-like, shape (n,)
        Outcome, ``NaN`` where missing.
    ddof : int, default 1
        Variance denominator is ``count - ddof`` within each pattern. Use 0 for
        maximum-likelihood moments.
    """
    x = as_vector(proxy, "proxy")
    y = as_vector(y, "y", allow_nan=True)
    if x.shape != y.shape:
        raise ValueError(f"proxy and y lengths differ: {x.shape[0]} vs {y.shape[0]}")
    observed = ~np.isnan(y)
    n1 = int(observed.sum())
    n0 = int(x.shape[0] - n1)
    if n1 < 2 or n0 < 2:
        raise InsufficientPattern(
            f"need at least 2 respondents and 2 nonrespondents, got {n1} and {n0}"
        )
    x1, y1, x0 = x[observed], y[observed], x[~observed]
    # sorted sums make the result independent of unit order
    mx1, my1 = _stable_mean(x1), _stable_mean(y1)
    dx, dy = x1 - mx1, y1 - my1
    resp = PatternMoments(
        mu_x=mx1,
        mu_y=my1,
        var_x=_stable_sum(dx * dx) / (n1 - ddof),
        var_y=_stable_sum(dy * dy) / (n1 - ddof),
        cov_xy=_stable_sum(dx * dy) / (n1 - ddof),
    )
    mx0 = _stable_mean(x0)
    vx0 = _stable_sum((x0 - mx0) ** 2) / (n0 - ddof)
    return ObservedSummary(resp, mx0, vx0, n1 / (n1 + n0), n_respondents=n1, n_total=n1 + n0)


def _stable_sum(v: np.ndarray) -> float:
    return math.fsum(np.sort(v))


def _stable_mean(v: np.ndarray) -> float:
    return _stable_sum(v) / v.shape[0]


# ---------------------------------------------------------------------------
# OLS proxy


@dataclass(frozen=True)
class ProxyFit:
    coefficients: np.ndarray  # intercept first
    proxy_values: np.ndarray
    r_squared: float
    respondent_rho: float
    feature_names: tuple = ()


class ProxyRegressor(RegressorMixin, BaseEstimator):
    """Least-squares regression with intercept, solved by the normal equations.

    The Gram matrix is equilibrated and Cholesky-factored; a pivot smaller
    than ``pivot_tol`` times the largest pivot means the design is
    (numerically) collinear and :class:`RankDeficientDesign` is raised rather
    than returning an arbitrary solution.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    intercept_ : float
    r_squared_ : float
        In-sample R-squared on the training rows.
    """

    def __init__(self, pivot_tol: float = PIVOT_TOL):
        self.pivot_tol = pivot_tol

    def fit(self, X, y):
        X = as_matrix(X, "X")
        y = as_vector(y, "y")
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if X.shape[0] < X.shape[1] + 2:
            raise RankDeficientDesign(
                f"{X.shape[0]} rows cannot identify {X.shape[1]} slopes plus intercept"
            )
        A = np.column_stack([np.ones(X.shape[0]), X])
        try:
            beta, _, _ = spd_solve(A.T @ A, A.T @ y, tol=self.pivot_tol)
        except RankDeficient as exc:
            raise RankDeficientDesign(f"collinear design columns ({exc})") from None
        self.intercept_ = float(beta[0])
        self.coef_ = beta[1:]
        self.n_features_in_ = X.shape[1]
        fitted = A @ beta
        resid = y - fitted
        sst = float(np.sum((y - y.mean()) ** 2))
        self.r_squared_ = 1.0 - float(resid @ resid) / sst if sst > 0 else 0.0
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return self.intercept_ + X @ self.coef_


def fit_proxy(y_respondents, design_respondents, design_all, feature_names=()) -> ProxyFit:
    """Regress the outcome on covariates among respondents and predict for everyone."""
    Zr = as_matrix(design_respondents, "design_respondents")
    Za = as_matrix(design_all, "design_all")
    if Zr.shape[1] != Za.shape[1]:
        raise ValueError("design matrices must share their column count")
    y = as_vector(y_respondents, "y_respondents")
    reg = ProxyRegressor().fit(Zr, y)
    fitted = reg.predict(Zr)
    rho = float(np.corrcoef(fitted, y)[0, 1]) if np.std(fitted) > 0 else 0.0
    return ProxyFit(
        coefficients=np.concatenate([[reg.intercept_], reg.coef_]),
        proxy_values=reg.predict(Za),
        r_squared=float(reg.r_squared_),
        respondent_rho=rho,
        feature_names=tuple(feature_names),
    )


# ---------------------------------------------------------------------------
# Covariate encoding


@dataclass
class _ColumnPlan:
    name: str
    kind: str  # "numeric" or "categorical"
    levels: list = field(default_factory=list)  # kept levels, reference excluded
    reference: object = None


class DesignEncoder(TransformerMixin, BaseEstimator):
    """Turn a covariate table into a numeric design matrix.

    Numeric columns pass through. Categorical columns (non-numeric dtype, or
    named in ``categorical``) become indicators for every level except the
    first one observed. Columns with a single level, or constant numeric
    columns, are dropped and noted in ``warnings_``; they would otherwise be
    collinear with the intercept.

    Parameters
    ----------
    categorical : sequence of str, optional
        Columns to treat as categorical even if they parse as numbers.
    """

    def __init__(self, categorical: Sequence[str] = ()):
        self.categorical = categorical

    def fit(self, X, y=None):
        df = _as_frame(X)
        forced = set(self.categorical or ())
        plans, notes = [], []
        for name in df.columns:
            col = df[name]
            if col.isna().all():
                raise EmptyColumn(f"column {name!r} has no observed values")
            _reject_missing(col, name)
            if name in forced or not pd.api.types.is_numeric_dtype(col):
                levels = list(pd.unique(col))
                if len(levels) < 2:
                    notes.append(f"dropped categorical column {name!r}: single level {levels[0]!r}")
                    continue
                plans.append(_ColumnPlan(name, "categorical", levels[1:], levels[0]))
            else:
                if col.nunique() < 2:
                    notes.append(f"dropped numeric column {name!r}: constant value {col.iloc[0]!r}")
                    continue
                plans.append(_ColumnPlan(name, "numeric"))
        for note in notes:
            warnings.warn(note, stacklevel=2)
        self.plans_ = plans
        self.warnings_ = notes
        self.feature_names_in_ = np.asarray(df.columns, dtype=object)
        self.n_features_in_ = len(df.columns)
        return self

    def transform(self, X):
        check_is_fitted(self, "plans_")
        df = _as_frame(X)
        blocks = []
        for plan in self.plans_:
            if plan.name not in df.columns:
                raise ValueError(f"missing column {plan.name!r}")
            col = df[plan.name]
            _reject_missing(col, plan.name)
            if plan.kind == "numeric":
                blocks.append(col.to_numpy(dtype=float)[:, None])
                continue
            known = set(plan.levels) | {plan.reference}
            unseen = ~col.isin(known)
            if unseen.any():
                raise ValueError(
                    f"column {plan.name!r} has unseen level {col[unseen].iloc[0]!r}"
                )
            blocks.append(np.column_stack([(col == lv).to_numpy(dtype=float) for lv in plan.levels]))
        if not blocks:
            return np.empty((len(df), 0))
        return np.hstack(blocks)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "plans_")
        names = []
        for plan in self.plans_:
            if plan.kind == "numeric":
                names.append(str(plan.name))
            else:
                names.extend(f"{plan.name}={lv}" for lv in plan.levels)
        return np.asarray(names, dtype=object)


def encode_design(table, categorical: Sequence[str] = ()):
    """Functional form of :class:`DesignEncoder`: returns ``(matrix, names, warnings)``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        enc = DesignEncoder(categorical=categorical).fit(table)
    return enc.transform(table), list(enc.get_feature_names_out()), list(enc.warnings_)


def _as_frame(X) -> pd.DataFrame:
    if isinstance(X, pd.DataFrame):
        return X
    if isinstance(X, dict):
        return pd.DataFrame(X)
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr[:, None]
    return pd.DataFrame(arr, columns=[f"x{i}" for i in range(arr.shape[1])])


def _reject_missing(col: pd.Series, name) -> None:
    missing = col.isna().to_numpy()
    if missing.any():
        row = int(np.flatnonzero(missing)[0])
        raise InputError(f"covariate {name!r} is missing", line=row + 2)
