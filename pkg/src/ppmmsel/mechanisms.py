"""The 18-mechanism factorial design and JSON (de)serialization of mechanisms."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from importlib import resources

from .moments import ObservedSummary, PatternMoments

RHO_LEVELS = (0.2, 0.5, 0.8)
NONRESP_MEAN_LEVELS = (0.8, 1.2)
NONRESP_VAR_LEVELS = (0.9, 1.0, 1.1)
DESIGN_PI = 0.75


@dataclass(frozen=True)
class Mechanism(ObservedSummary):
    """An :class:`ObservedSummary` with a label."""

    id: str = ""

    def to_dict(self) -> dict:
        return {"id": self.id, **super().to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Mechanism":
        base = ObservedSummary.from_dict(d)
        return cls(
            respondent=base.respondent,
            nonresp_mu_x=base.nonresp_mu_x,
            nonresp_var_x=base.nonresp_var_x,
            pi=base.pi,
            n_respondents=base.n_respondents,
            n_total=base.n_total,
            id=str(d.get("id", "")),
        ).validate()

    @classmethod
    def from_summary(cls, s: ObservedSummary, id: str = "") -> "Mechanism":
        return cls(s.respondent, s.nonresp_mu_x, s.nonresp_var_x, s.pi,
                   s.n_respondents, s.n_total, id=id)


def builtin_mechanisms() -> list[Mechanism]:
    """Respondent X and Y with unit means and variances, pi = 0.75.

    Rows are ordered by nonrespondent proxy variance, then nonrespondent
    proxy mean, then respondent correlation, giving ids "1" to "18".
    """
    out = []
    rows = itertools.product(NONRESP_VAR_LEVELS, NONRESP_MEAN_LEVELS, RHO_LEVELS)
    for i, (var0, mu0, rho) in enumerate(rows, start=1):
        resp = PatternMoments(mu_x=1.0, mu_y=1.0, var_x=1.0, var_y=1.0, cov_xy=rho)
        out.append(Mechanism(resp, mu0, var0, DESIGN_PI, id=str(i)).validate())
    return out


def get_mechanism(mech_id) -> Mechanism:
    for m in builtin_mechanisms():
        if m.id == str(mech_id):
            return m
    raise KeyError(f"no built-in mechanism {mech_id!r}; ids are 1-18")


def load_mechanism(path) -> Mechanism:
    """Read a mechanism (or bare summary) from JSON. ``builtin:hps`` loads the shipped example."""
    if str(path) == "builtin:hps":
        text = resources.files("ppmmsel.data").joinpath("hps_wave29.json").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    d = json.loads(text)
    if "id" not in d:
        d = {**d, "id": "config"}
    return Mechanism.from_dict(d)


def dump_mechanisms(mechs) -> str:
    return json.dumps([m.to_dict() for m in mechs], indent=2)
