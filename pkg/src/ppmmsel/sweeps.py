"""Curves over phi (or over the outcome) ready for plotting.

A point where the model cannot be identified is kept as a gap (value
``None`` plus a reason) so that series sharing an abscissa stay aligned.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ._validation import check_phi, phi_grid as make_phi_grid
from .exceptions import PPMMError
from .identification import marginal_mean, try_identify
from .moments import ObservedSummary
from .selection import lambda_coefficients, odds_ratio_y, prob_nonresponse

DEFAULT_PHI_LEVELS = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass
class CurveSeries:
    name: str
    abscissa_name: str
    points: list  # (abscissa, value or None, reason or None)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        xs = [p[0] for p in self.points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError(f"abscissae of series {self.name!r} are not strictly increasing")

    @property
    def abscissae(self) -> np.ndarray:
        return np.array([p[0] for p in self.points], dtype=float)

    @property
    def values(self) -> np.ndarray:
        """Values with ``NaN`` in the gaps."""
        return np.array([math.nan if p[1] is None else p[1] for p in self.points], dtype=float)

    @property
    def valid(self) -> np.ndarray:
        return np.array([p[1] is not None for p in self.points])

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "abscissa_name": self.abscissa_name,
            "metadata": self.metadata,
            "points": [
                {"abscissa": a, "value": v, **({"reason": r} if r else {})}
                for a, v, r in self.points
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CurveSeries":
        pts = [(p["abscissa"], p["value"], p.get("reason")) for p in d["points"]]
        return cls(d["name"], d["abscissa_name"], pts, dict(d.get("metadata", {})))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["abscissa", "value", "valid"])
        for a, v, _ in self.points:
            w.writerow([repr(float(a)), "" if v is None else repr(float(v)), int(v is not None)])
        return buf.getvalue()


def _series_id(summary) -> str:
    return str(getattr(summary, "id", "") or "summary")


def _resolve_phis(phis) -> np.ndarray:
    if phis is None:
        return make_phi_grid(0.0, 1.0, 0.01)
    return np.array([check_phi(p) for p in phis], dtype=float)


def _fit_curve(summary, phis, evaluate):
    """Evaluate ``evaluate(model)`` along ``phis``; failures become gaps."""
    points = []
    for phi in phis:
        model, reason = try_identify(summary, phi)
        if model is None:
            points.append((float(phi), None, reason))
            continue
        try:
            value = float(evaluate(model))
        except PPMMError as exc:
            points.append((float(phi), None, f"{type(exc).__name__}: {exc}"))
            continue
        points.append((float(phi), value, None))
    return points


def resolve_y_levels(summary: ObservedSummary, y_levels) -> list[tuple[str, float]]:
    """``"sd"`` gives the respondent outcome mean and mean +/- 1 SD; otherwise explicit values."""
    r = summary.respondent
    if isinstance(y_levels, str):
        if y_levels != "sd":
            raise ValueError(f"unknown y-level choice {y_levels!r}")
        return [("mean-sd", r.mu_y - r.sd_y), ("mean", r.mu_y), ("mean+sd", r.mu_y + r.sd_y)]
    return [(f"y={float(v):g}", float(v)) for v in y_levels]


def sweep_or(
    summary: ObservedSummary,
    phi_grid=None,
    y_levels: Union[str, Sequence[float]] = "sd",
    x_fix: Optional[float] = None,
    delta: float = 1.0,
) -> list[CurveSeries]:
    """Odds ratio of nonresponse for a ``delta`` increase in Y, as a function of phi.

    One series per outcome level. ``x_fix`` defaults to the overall proxy mean.
    """
    phis = _resolve_phis(phi_grid)
    x = summary.overall_mu_x if x_fix is None else float(x_fix)
    out = []
    for label, y in resolve_y_levels(summary, y_levels):
        points = _fit_curve(summary, phis, lambda m, y=y: odds_ratio_y(lambda_coefficients(m), x, y, delta))
        meta = {"mechanism": _series_id(summary), "quantity": "odds_ratio",
                "x_fixed": x, "y_level": y, "y_label": label, "delta": float(delta)}
        out.append(CurveSeries(f"or_{_series_id(summary)}_{label}", "phi", points, meta))
    return out


def sweep_prob(
    summary: ObservedSummary,
    phi_levels=DEFAULT_PHI_LEVELS,
    y_grid=None,
    x_fix: Optional[float] = None,
) -> list[CurveSeries]:
    """Nonresponse probability along an outcome grid, one series per phi.

    The default outcome grid spans the respondent mean +/- 3 SD in 61 steps.
    """
    r = summary.respondent
    if y_grid is None:
        y_grid = np.linspace(r.mu_y - 3 * r.sd_y, r.mu_y + 3 * r.sd_y, 61)
    y_grid = np.asarray(y_grid, dtype=float)
    x = summary.overall_mu_x if x_fix is None else float(x_fix)
    out = []
    for phi in phi_levels:
        phi = check_phi(phi)
        model, reason = try_identify(summary, phi)
        if model is None:
            points = [(float(y), None, reason) for y in y_grid]
        else:
            probs = prob_nonresponse(lambda_coefficients(model), x, y_grid)
            points = [(float(y), float(p), None) for y, p in zip(y_grid, probs)]
        meta = {"mechanism": _series_id(summary), "quantity": "prob_nonresponse",
                "x_fixed": x, "phi": phi}
        out.append(CurveSeries(f"prob_{_series_id(summary)}_phi={phi:g}", "y", points, meta))
    return out


def sweep_mean(summary: ObservedSummary, phi_grid=None) -> CurveSeries:
    """Marginal outcome mean as a function of phi."""
    phis = _resolve_phis(phi_grid)
    points = _fit_curve(summary, phis, marginal_mean)
    meta = {"mechanism": _series_id(summary), "quantity": "marginal_mean"}
    return CurveSeries(f"mean_{_series_id(summary)}", "phi", points, meta)
