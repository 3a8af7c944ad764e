"""Command-line interface.

Exit codes: 0 success, 1 input error, 2 numerical invalidity (the model
cannot be identified at any requested phi > 0), 3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import check_phi, parse_phi_grid, phi_grid as make_phi_grid
from .analysis import analyze
from .exceptions import (
    DegenerateProxy,
    InvalidIdentification,
    NotStrictlyPositiveResidual,
    PPMMError,
    Separation,
)
from .harness import validate
from .identification import identify, marginal_mean, try_identify
from .mechanisms import builtin_mechanisms, dump_mechanisms, get_mechanism, load_mechanism
from .selection import lambda_coefficients, tau_coefficients
from .simulation import simulate
from .sweeps import DEFAULT_PHI_LEVELS, sweep_mean, sweep_or, sweep_prob

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3
_NUMERIC_ERRORS = (InvalidIdentification, DegenerateProxy, NotStrictlyPositiveResidual, Separation)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _names(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _y_grid(text):
    parts = [float(p) for p in text.split(":")]
    if len(parts) != 3 or parts[2] <= 0:
        raise argparse.ArgumentTypeError("y grid must be start:stop:step")
    start, stop, step = parts
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 12)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--phi-grid", type=parse_phi_grid, default=None,
                        help="start:stop:step (default 0:1:0.01) or a single value")
    common.add_argument("--seed", type=int, default=20240501, help="unsigned 64-bit seed")
    common.add_argument("--out", type=Path, help="output directory (or file for simulate)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    source = argparse.ArgumentParser(add_help=False)
    grp = source.add_mutually_exclusive_group()
    grp.add_argument("--mechanism", default=None, help="built-in mechanism id 1-18")
    grp.add_argument("--config", default=None,
                     help="mechanism/summary JSON file, or builtin:hps for the shipped example")

    p = _Parser(prog="ppmmsel", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    mech = sub.add_parser("mechanisms", help="built-in mechanism design")
    mech_sub = mech.add_subparsers(dest="action", required=True, parser_class=_Parser)
    mech_sub.add_parser("export", parents=[common], help="write the 18 mechanisms")

    sub.add_parser("identify", parents=[common, source], help="nonrespondent moments per phi")
    sub.add_parser("coeffs", parents=[common, source], help="selection-model coefficients per phi")

    s_or = sub.add_parser("sweep-or", parents=[common, source], help="odds ratio vs phi")
    s_or.add_argument("--y-levels", default="sd",
                      help="'sd' (mean and mean +/- 1 SD) or comma-separated outcome values")
    s_or.add_argument("--x-fix", type=float, default=None, help="proxy value (default overall mean)")
    s_or.add_argument("--delta", type=float, default=1.0, help="outcome increment for the odds ratio")

    s_pr = sub.add_parser("sweep-prob", parents=[common, source], help="P(nonresponse) vs outcome")
    s_pr.add_argument("--phi-levels", type=_floats, default=list(DEFAULT_PHI_LEVELS))
    s_pr.add_argument("--y-grid", type=_y_grid, default=None, help="start:stop:step")
    s_pr.add_argument("--x-fix", type=float, default=None)

    sub.add_parser("sweep-mean", parents=[common, source], help="marginal mean vs phi")

    an = sub.add_parser("analyze", parents=[common], help="analyze a CSV extract")
    an.add_argument("csv", type=Path)
    an.add_argument("--outcome", default=None)
    an.add_argument("--outcome-sum", type=_names, default=[],
                    help="comma-separated item columns summed into the outcome")
    an.add_argument("--exclude", type=_names, default=[])
    an.add_argument("--categorical", type=_names, default=[])
    an.add_argument("--phi-levels", type=_floats, default=list(DEFAULT_PHI_LEVELS))
    an.add_argument("--y-grid", type=_y_grid, default=None)
    an.add_argument("--x-fix", type=float, default=None)
    an.add_argument("--delta", type=float, default=1.0)
    an.add_argument("--mle-variance", action="store_true",
                    help="use denominator n instead of n-1 for pattern variances")

    sim = sub.add_parser("simulate", parents=[common, source], help="draw a dataset")
    sim.add_argument("--phi", type=float, default=0.5)
    sim.add_argument("-n", "--n", type=int, default=10_000)

    val = sub.add_parser("validate", parents=[common, source], help="oracle and Monte-Carlo checks")
    val.add_argument("--all", action="store_true", help="every built-in mechanism")
    val.add_argument("--grid-size", type=int, default=31)
    val.add_argument("--grid-span", type=float, default=4.0)
    val.add_argument("--n-mc", type=int, default=0, help="Monte-Carlo sample size (0 skips)")
    val.add_argument("--mc-phi", type=_floats, default=[0.5])
    return p


# ---------------------------------------------------------------------------
# helpers


def _source(args):
    if args.config:
        return load_mechanism(args.config)
    if args.mechanism:
        try:
            return get_mechanism(args.mechanism)
        except KeyError as exc:
            raise PPMMError(str(exc.args[0])) from None
    raise PPMMError("give --mechanism ID or --config FILE")


def _grid(args, default_step=0.01):
    return args.phi_grid if args.phi_grid is not None else make_phi_grid(0.0, 1.0, default_step)


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _records_csv(records) -> str:
    buf = io.StringIO()
    keys = list(dict.fromkeys(k for r in records for k in r))
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in keys})
    return buf.getvalue()


def _emit_records(args, records, stem):
    text = _dumps(records) if args.format == "json" else _records_csv(records)
    if args.out:
        _write(args.out / f"{stem}.{args.format}", text)
    else:
        sys.stdout.write(text)


def _emit_series(args, series, source=None, extra=None):
    if args.out:
        for s in series:
            _write(args.out / "series" / f"{s.name}.csv", s.to_csv())
        summary = dict(extra or {})
        if source is not None:
            summary["source"] = source.to_dict()
        summary["series"] = [s.to_dict() for s in series]
        _write(args.out / "summary.json", _dumps(summary))
        return
    if args.format == "json":
        sys.stdout.write(_dumps([s.to_dict() for s in series]))
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["series", "abscissa", "value", "valid"])
    for s in series:
        for a, v, _ in s.points:
            w.writerow([s.name, repr(a), "" if v is None else repr(v), int(v is not None)])
    sys.stdout.write(buf.getvalue())


def _all_positive_phi_invalid(points) -> bool:
    positive = [p for p in points if p[0] > 0]
    return bool(positive) and all(v is None for _, v, _ in positive)


# ---------------------------------------------------------------------------
# subcommands


def cmd_mechanisms(args):
    mechs = builtin_mechanisms()
    if args.format == "json":
        text = dump_mechanisms(mechs) + "\n"
    else:
        rows = [{"id": m.id, **{k: v for k, v in m.respondent.to_dict().items()},
                 "rho": m.rho1, "resid_var_y": m.respondent.var_y * (1 - m.rho1 ** 2),
                 "nonresp_mu_x": m.nonresp_mu_x, "nonresp_var_x": m.nonresp_var_x, "pi": m.pi}
                for m in mechs]
        text = _records_csv(rows)
    if args.out:
        _write(args.out / f"mechanisms.{args.format}", text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _per_phi(args, build):
    src = _source(args)
    records = []
    for phi in _grid(args):
        model, reason = try_identify(src, phi)
        rec = {"mechanism": src.id, "phi": float(phi), "valid": model is not None}
        if model is None:
            rec["reason"] = reason
        else:
            rec.update(build(src, model))
        records.append(rec)
    return records


def _records_exit(records) -> int:
    positive = [r for r in records if r["phi"] > 0] or records
    return EXIT_OK if any(r["valid"] for r in positive) else EXIT_NUMERIC


def cmd_identify(args):
    def build(src, model):
        n = model.nonrespondent
        return {"mu_y0": n.mu_y, "var_y0": n.var_y, "cov_xy0": n.cov_xy,
                "mu_x0": n.mu_x, "var_x0": n.var_x, "marginal_mean": marginal_mean(model)}
    records = _per_phi(args, build)
    _emit_records(args, records, "identify")
    return _records_exit(records)


def cmd_coeffs(args):
    def build(src, model):
        lam = lambda_coefficients(model).as_array()
        r, n = model.respondent, model.nonrespondent
        tau = tau_coefficients(model.pi, (r.mu_x, r.var_x), (n.mu_x, n.var_x)).as_array()
        rec = {f"lambda{i}": float(v) for i, v in enumerate(lam)}
        # logit P(R=1 | x, y) is the negation
        rec.update({f"resp_lambda{i}": float(-v) for i, v in enumerate(lam)})
        rec.update({f"tau{i}": float(v) for i, v in enumerate(tau)})
        return rec
    records = _per_phi(args, build)
    _emit_records(args, records, "coeffs")
    return _records_exit(records)


def cmd_sweep_or(args):
    src = _source(args)
    levels = "sd" if args.y_levels == "sd" else _floats(args.y_levels)
    series = sweep_or(src, _grid(args), levels, args.x_fix, args.delta)
    _emit_series(args, series, src)
    return EXIT_NUMERIC if all(_all_positive_phi_invalid(s.points) for s in series) else EXIT_OK


def cmd_sweep_prob(args):
    src = _source(args)
    series = sweep_prob(src, args.phi_levels, args.y_grid, args.x_fix)
    _emit_series(args, series, src)
    positive = [s for s in series if s.metadata["phi"] > 0]
    bad = positive and all(not s.valid.any() for s in positive)
    return EXIT_NUMERIC if bad else EXIT_OK


def cmd_sweep_mean(args):
    src = _source(args)
    s = sweep_mean(src, _grid(args))
    _emit_series(args, [s], src)
    return EXIT_NUMERIC if _all_positive_phi_invalid(s.points) else EXIT_OK


def cmd_analyze(args):
    result = analyze(
        args.csv, outcome=args.outcome, outcome_sum=args.outcome_sum, exclude=args.exclude,
        phi_grid=_grid(args), phi_levels=args.phi_levels, y_grid=args.y_grid,
        x_fix=args.x_fix, delta=args.delta, ddof=0 if args.mle_variance else 1,
        categorical=args.categorical,
    )
    if args.out:
        for s in result.series:
            _write(args.out / "series" / f"{s.name}.csv", s.to_csv())
        report = dict(result.report)
        report["series"] = [s.to_dict() for s in result.series]
        _write(args.out / "summary.json", _dumps(report))
    else:
        sys.stdout.write(_dumps(result.report))
    return EXIT_NUMERIC if result.report["phi_validity"][1] == 0.0 else EXIT_OK


def cmd_simulate(args):
    src = _source(args)
    model = identify(src, check_phi(args.phi))
    data = simulate(model, args.n, args.seed, src.id)
    if args.out:
        out = args.out if args.out.suffix else args.out / "simulated.csv"
        out.parent.mkdir(parents=True, exist_ok=True)
        data.to_csv(out)
    else:
        sys.stdout.write("x,y,r\n")
        for xi, yi, ri in zip(data.x, data.y, data.r):
            sys.stdout.write(f"{float(xi)!r},{float(yi)!r},{int(ri)}\n")
    return EXIT_OK


def cmd_validate(args):
    if args.all:
        targets = builtin_mechanisms()
    else:
        targets = [_source(args)]
    report = validate(targets, _grid(args, 0.1), args.grid_size, args.grid_span,
                      args.n_mc, args.mc_phi, args.seed)
    text = _dumps(report)
    if args.out:
        _write(args.out / "validation.json", text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


COMMANDS = {
    "mechanisms": cmd_mechanisms,
    "identify": cmd_identify,
    "coeffs": cmd_coeffs,
    "sweep-or": cmd_sweep_or,
    "sweep-prob": cmd_sweep_prob,
    "sweep-mean": cmd_sweep_mean,
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except _NUMERIC_ERRORS as exc:
        print(f"ppmmsel: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, KeyError) as exc:
        print(f"ppmmsel: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
