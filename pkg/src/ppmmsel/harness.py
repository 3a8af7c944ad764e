"""On-demand cross-checks: analytic coefficients vs the density-ratio oracle and vs simulation."""

from __future__ import annotations

import numpy as np

from ._validation import phi_grid as make_phi_grid
from .identification import try_identify
from .selection import lambda_coefficients, logit_nonresponse
from .simulation import bayes_logit_oracle, mc_recover_lambdas

ORACLE_TOL = 1e-10
Z_LIMIT = 4.0


def oracle_grid(summary, size: int = 31, span: float = 4.0):
    """``size x size`` mesh over respondent mean +/- ``span`` SD in each coordinate."""
    r = summary.respondent
    gx = np.linspace(r.mu_x - span * r.sd_x, r.mu_x + span * r.sd_x, size)
    gy = np.linspace(r.mu_y - span * r.sd_y, r.mu_y + span * r.sd_y, size)
    return np.meshgrid(gx, gy)


def oracle_discrepancy(model, x, y) -> float:
    return float(np.max(np.abs(
        logit_nonresponse(lambda_coefficients(model), x, y) - bayes_logit_oracle(model, x, y)
    )))


def validate(summaries, phi_grid=None, grid_size: int = 31, grid_span: float = 4.0,
             n_mc: int = 0, mc_phis=(0.5,), seed: int = 0) -> dict:
    """Run the oracle comparison (and optionally Monte-Carlo recovery) for each summary.

    Pairs of (summary, phi) that cannot be identified are listed as excluded;
    they never count as failures. The report is plain JSON-compatible data.
    """
    if not isinstance(summaries, (list, tuple)):
        summaries = [summaries]
    phis = make_phi_grid(0.0, 1.0, 0.1) if phi_grid is None else np.asarray(phi_grid, dtype=float)
    entries = []
    overall_max = 0.0
    passed = True
    for s in summaries:
        sid = str(getattr(s, "id", "") or "summary")
        X, Y = oracle_grid(s, grid_size, grid_span)
        evaluated, excluded = [], []
        worst = 0.0
        for phi in phis:
            model, reason = try_identify(s, phi)
            if model is None:
                excluded.append({"phi": float(phi), "reason": reason})
                continue
            d = oracle_discrepancy(model, X, Y)
            worst = max(worst, d)
            evaluated.append(float(phi))
        oracle_ok = worst < ORACLE_TOL
        entry = {
            "mechanism": sid,
            "oracle": {"max_abs_diff": worst, "threshold": ORACLE_TOL, "passed": oracle_ok,
                       "evaluated_phi": evaluated, "excluded": excluded},
            "monte_carlo": [],
        }
        overall_max = max(overall_max, worst)
        passed &= oracle_ok
        if n_mc:
            for phi in mc_phis:
                model, reason = try_identify(s, phi)
                if model is None:
                    entry["monte_carlo"].append({"phi": float(phi), "excluded": reason})
                    continue
                fit, terms = mc_recover_lambdas(model, n_mc, seed, sid)
                max_z = max(abs(t["z"]) for t in terms)
                ok = bool(max_z < Z_LIMIT and fit.converged)
                passed &= ok
                entry["monte_carlo"].append({
                    "phi": float(phi), "n": int(n_mc), "seed": int(seed),
                    "converged": bool(fit.converged), "terms": terms,
                    "max_abs_z": max_z, "z_limit": Z_LIMIT, "passed": ok,
                })
        entries.append(entry)
    return {"max_abs_diff": overall_max, "passed": bool(passed), "mechanisms": entries}
