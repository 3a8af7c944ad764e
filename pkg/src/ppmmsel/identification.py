"""Nonrespondent moments implied by the PPMM restriction at a given phi.

The restriction says response depends on (X, Y) only through
``(1 - phi) * X * (sd_y / sd_x) + phi * Y``. Under bivariate normality this
pins down the nonrespondent outcome mean, variance and covariance as shifts
of the respondent values, all scaled by a single multiplier :func:`g_factor`.
"""

from __future__ import annotations

from dataclasses import dataclass

from ._validation import check_phi, phi_grid
from .exceptions import DegenerateProxy, InvalidIdentification, PPMMError
from .moments import ObservedSummary, PatternMoments, validate_pattern_moments

RHO_TOL = 1e-12
RESIDUAL_RTOL = 1e-14


def g_factor(phi: float, rho1: float) -> float:
    """Multiplier ``(phi + (1 - phi) rho) / (phi rho + (1 - phi))``.

    Equals ``rho`` at phi=0 (regression calibration), 1 at phi=0.5, and
    ``1 / rho`` at phi=1.
    """
    phi = check_phi(phi)
    rho1 = float(rho1)
    if rho1 < -RHO_TOL or rho1 > 1 + RHO_TOL:
        raise DegenerateProxy(f"proxy correlation must lie in [0, 1], got {rho1}")
    if phi == 1.0 and rho1 <= RHO_TOL:
        raise DegenerateProxy("phi = 1 requires a proxy with positive correlation")
    return (phi + (1 - phi) * rho1) / (phi * rho1 + (1 - phi))


@dataclass(frozen=True)
class IdentifiedModel:
    respondent: PatternMoments
    nonrespondent: PatternMoments
    pi: float
    phi: float

    @property
    def marginal_mean(self) -> float:
        return marginal_mean(self)

    def to_dict(self) -> dict:
        return {
            "respondent": self.respondent.to_dict(),
            "nonrespondent": self.nonrespondent.to_dict(),
            "pi": self.pi,
            "phi": self.phi,
        }


def identify(obs: ObservedSummary, phi: float) -> IdentifiedModel:
    """Fill in the nonrespondent outcome moments for sensitivity parameter ``phi``.

    Raises
    ------
    DegenerateProxy
        ``phi == 1`` with a zero respondent correlation.
    InvalidIdentification
        The implied nonrespondent variance, or the conditional variance of Y
        given X among nonrespondents, is not positive. The (phi, moments)
        pair is outside the region where the model is a proper normal mixture.
    """
    phi = check_phi(phi)
    obs.validate()
    r = obs.respondent
    g = g_factor(phi, r.rho)
    ratio = r.sd_y / r.sd_x
    d_mu = obs.nonresp_mu_x - r.mu_x
    d_var = obs.nonresp_var_x - r.var_x
    mu_y0 = r.mu_y + ratio * g * d_mu
    var_y0 = r.var_y + (r.var_y / r.var_x) * g * g * d_var
    cov_xy0 = r.cov_xy + ratio * g * d_var
    if not var_y0 > 0:
        raise InvalidIdentification(
            f"phi={phi:g}: nonrespondent outcome variance {var_y0:.6g} is not positive"
        )
    resid0 = var_y0 - cov_xy0 ** 2 / obs.nonresp_var_x
    if not resid0 > RESIDUAL_RTOL * var_y0:
        raise InvalidIdentification(
            f"phi={phi:g}: nonrespondent conditional variance {resid0:.6g} is not positive"
        )
    nonresp = PatternMoments(obs.nonresp_mu_x, mu_y0, obs.nonresp_var_x, var_y0, cov_xy0)
    validate_pattern_moments(nonresp)
    return IdentifiedModel(r, nonresp, obs.pi, phi)


def marginal_mean(model: IdentifiedModel) -> float:
    """Population outcome mean: response-rate weighted average of the pattern means."""
    return model.pi * model.respondent.mu_y + (1 - model.pi) * model.nonrespondent.mu_y


def try_identify(obs: ObservedSummary, phi: float):
    """``(model, None)`` on success, ``(None, reason)`` when identification fails."""
    try:
        return identify(obs, phi), None
    except PPMMError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def phi_validity_bound(obs: ObservedSummary, grid_step: float = 0.01) -> tuple[float, float]:
    """Largest ``[0, phi_max]`` prefix of the phi grid on which :func:`identify` succeeds."""
    if not 0 < grid_step <= 0.1:
        raise ValueError("grid_step must lie in (0, 0.1]")
    obs.validate()
    phi_max = None
    for phi in phi_grid(0.0, 1.0, grid_step):
        model, _ = try_identify(obs, phi)
        if model is None:
            break
        phi_max = float(phi)
    if phi_max is None:
        # unreachable for a validated summary: phi=0 is regression calibration
        raise InvalidIdentification("identification fails already at phi = 0")
    return (0.0, phi_max)

