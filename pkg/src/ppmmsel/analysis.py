"""End-to-end analysis of a survey extract: CSV -> proxy -> summary -> curves."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .exceptions import InputError, PPMMError
from .identification import phi_validity_bound
from .moments import ObservedSummary, encode_design, fit_proxy, summarize
from .sweeps import DEFAULT_PHI_LEVELS, CurveSeries, sweep_mean, sweep_or, sweep_prob

MISSING_TOKENS = ["", "NA"]


def load_table(path, outcome: Optional[str] = None, outcome_sum: Sequence[str] = (),
               exclude: Sequence[str] = ()):
    """Read a CSV into ``(covariates, y)``.

    Empty fields and ``NA`` are missing. A column is numeric when every
    non-missing entry parses as a number, categorical otherwise. With
    ``outcome_sum`` the outcome is the row sum of those columns and is missing
    whenever any of them is.
    """
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, na_values=MISSING_TOKENS,
                          encoding="utf-8")
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot parse {path}: {exc}") from None
    except pd.errors.EmptyDataError:
        raise InputError(f"{path} is empty") from None
    items = list(outcome_sum)
    if bool(outcome) == bool(items):
        raise InputError("give exactly one of an outcome column or outcome-sum columns")
    wanted = items or [outcome]
    for name in [*wanted, *exclude]:
        if name not in raw.columns:
            raise InputError(f"column {name!r} not found in header")
    parts = [_numeric_column(raw[name], name) for name in wanted]
    y = np.sum(parts, axis=0)  # NaN propagates: missing if any item missing
    covariates = raw.drop(columns=[*wanted, *exclude])
    for name in covariates.columns:
        col = covariates[name]
        parsed = pd.to_numeric(col, errors="coerce")
        if (parsed.isna() == col.isna()).all():
            covariates[name] = parsed
    return covariates, np.asarray(y, dtype=float)


def _numeric_column(col: pd.Series, name: str) -> np.ndarray:
    parsed = pd.to_numeric(col, errors="coerce")
    bad = parsed.isna() & col.notna()
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise InputError(f"outcome column {name!r} has non-numeric value {col.iloc[row]!r}",
                         line=row + 2)
    return parsed.to_numpy(dtype=float)


@dataclass
class AnalysisResult:
    summary: ObservedSummary
    report: dict
    series: list = field(default_factory=list)


def analyze_arrays(covariates, y, phi_grid=None, phi_levels=DEFAULT_PHI_LEVELS,
                   y_grid=None, x_fix=None, delta: float = 1.0, ddof: int = 1,
                   categorical: Sequence[str] = (), with_series: bool = True) -> AnalysisResult:
    """Encode covariates, build the proxy, summarize, and (optionally) compute curves."""
    y = np.asarray(y, dtype=float)
    design, names, notes = encode_design(covariates, categorical=categorical)
    observed = ~np.isnan(y)
    if observed.sum() < 2 or (~observed).sum() < 2:
        # let summarize produce the canonical error
        summarize(np.zeros_like(y), y)
    proxy = fit_proxy(y[observed], design[observed], design, names)
    summary = summarize(proxy.proxy_values, y, ddof=ddof)
    bound = phi_validity_bound(summary, 0.01)
    report = {
        "n_total": int(y.shape[0]),
        "n_respondents": int(observed.sum()),
        "response_rate": summary.pi,
        "features": list(names),
        "dropped": list(notes),
        "proxy": {
            "intercept": float(proxy.coefficients[0]),
            "coefficients": {n: float(c) for n, c in zip(names, proxy.coefficients[1:])},
            "r_squared": proxy.r_squared,
            "respondent_rho": proxy.respondent_rho,
        },
        "summary": summary.to_dict(),
        "phi_validity": [bound[0], bound[1]],
        "ddof": int(ddof),
    }
    series = []
    if with_series:
        series = [
            *sweep_or(summary, phi_grid, "sd", x_fix, delta),
            *sweep_prob(summary, phi_levels, y_grid, x_fix),
            sweep_mean(summary, phi_grid),
        ]
        report["series"] = [s.name for s in series]
    return AnalysisResult(summary, report, series)


def analyze(csv_path, outcome: Optional[str] = None, outcome_sum: Sequence[str] = (),
            exclude: Sequence[str] = (), **options) -> AnalysisResult:
    """Run :func:`analyze_arrays` on a CSV file; see :func:`load_table` for the format."""
    covariates, y = load_table(csv_path, outcome, outcome_sum, exclude)
    try:
        result = analyze_arrays(covariates, y, **options)
    except InputError:
        raise
    except PPMMError as exc:
        raise type(exc)(f"{csv_path}: {exc}") from exc
    result.report["input"] = str(csv_path)
    result.report["outcome"] = outcome or "+".join(outcome_sum)
    return result
