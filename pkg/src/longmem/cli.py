"""Command-line front end: ``longmem {simulate,estimate,montecarlo,info,spectrum}``.

Exit codes: 0 success, 2 input or validation error, 3 estimator did not converge.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from . import config as cfgmod
from .asymptotics import information_matrix, standard_errors
from .css import minimize
from .errors import ContractError, LongMemoryError, ValidationError
from .model import ModelOrder, ModelSpec, ParamVector, spectral_density, validate
from .montecarlo import run_experiment
from .simulation import (InnovationLaw, read_csv, simulate_exact_gaussian, simulate_truncated_ma,
                         write_csv)
from .whittle import whittle_estimate

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED = 0, 2, 3


class _InputError(Exception):
    pass


def _model_args(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key-value model file (flags override its values)")
    p.add_argument("--delta", type=float)
    p.add_argument("--ar", default=None, help="comma-separated AR coefficients")
    p.add_argument("--ma", default=None, help="comma-separated MA coefficients")
    p.add_argument("--sigma2", type=float)


def _spec_from_args(args) -> ModelSpec:
    mapping = cfgmod.read_config(args.config) if getattr(args, "config", None) else {}
    mapping = {k: v for k, v in mapping.items() if k in cfgmod.MODEL_KEYS}
    if args.delta is not None:
        mapping["theta.delta"] = repr(args.delta)
    if args.ar is not None:
        mapping["theta.ar"] = args.ar
        mapping.pop("order.p", None)
    if args.ma is not None:
        mapping["theta.ma"] = args.ma
        mapping.pop("order.q", None)
    if args.sigma2 is not None:
        mapping["sigma2"] = repr(args.sigma2)
    spec = cfgmod.spec_from_mapping(mapping)
    report = validate(spec)
    if not report.ok:
        names = "; ".join(c.name for c in report.failures)
        raise ValidationError(f"invalid model ({names}):\n{report}", report)
    return spec


def _write_text(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def cmd_simulate(args) -> int:
    spec = _spec_from_args(args)
    if args.n is None or args.n < 1:
        raise _InputError("--n must be a positive integer")
    law = InnovationLaw(args.law, args.df)
    method = args.method or ("truncated-ma" if args.emit_innovations or law.kind != "gaussian"
                             else "exact")
    if method == "exact":
        if law.kind != "gaussian":
            raise _InputError("exact simulation is Gaussian only")
        ts = simulate_exact_gaussian(spec, args.n, args.seed)
    else:
        ts = simulate_truncated_ma(spec, args.n, law=law, seed=args.seed)
    if args.out in (None, "-"):
        sys.stdout.write("x\n" + "".join(repr(float(v)) + "\n" for v in ts.values))
    else:
        write_csv(args.out, ts.values)
    if args.emit_innovations:
        path = args.innovations_out or (
            (args.out.rsplit(".", 1)[0] if args.out not in (None, "-") else "series")
            + ".innovations.csv")
        write_csv(path, ts.innovations, header="eps")
    return EXIT_OK


def cmd_estimate(args) -> int:
    try:
        x = read_csv(args.input)
    except OSError as exc:
        raise _InputError(f"cannot read {args.input}: {exc}") from None
    if x.size < 20:
        raise _InputError(f"need at least 20 observations, got {x.size}")
    order = ModelOrder(args.p, args.q)
    start = None
    if args.delta is not None:
        ar = cfgmod.parse_list(args.ar or "")
        ma = cfgmod.parse_list(args.ma or "")
        start = ParamVector(args.delta, tuple(ar), tuple(ma))
        if start.order != order:
            order = start.order
    mean_correct = args.mean_correct == "on"
    if args.estimator == "css":
        res = minimize(x, order=order, starts=[start], mean_correct=mean_correct)
    else:
        res = whittle_estimate(x, order=order, starts=[start], mean_correct=mean_correct)
    out = res.to_dict()
    out["mean_corrected"] = mean_correct
    _write_text(args.out, cfgmod.dumps(out) + "\n")
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_montecarlo(args) -> int:
    mapping = cfgmod.read_config(args.config)
    if args.replications is not None:
        mapping["replications"] = str(args.replications)
    config = cfgmod.mc_config_from_mapping(mapping)
    report = run_experiment(config)
    _write_text(args.out, cfgmod.dumps(report.to_dict()) + "\n")
    if args.out not in (None, "-"):
        print(report.summary_table())
    else:
        sys.stderr.write(report.summary_table() + "\n")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            k = config.spec0.theta.dim
            names = config.spec0.theta.names()
            w.writerow(["estimator", "n", "replication", "converged"] + names)
            for r in report.records:
                w.writerow([r["estimator"], r["n"], r["replication"], int(r["converged"])]
                           + [format(v, ".17g") for v in r["theta_hat"][:k]])
    return EXIT_OK


def cmd_info(args) -> int:
    spec = _spec_from_args(args)
    im = information_matrix(spec.theta)
    ns = cfgmod.parse_list(args.n or "1024", int)
    table = []
    for n in ns:
        se, ci = standard_errors(im, n, spec.theta)
        table.append({"n": n, "se": se.tolist(), "ci95_at_theta": ci.tolist()})
    out = {
        "parameter_names": spec.theta.names(),
        "theta": spec.theta.as_array().tolist(),
        "omega": im.omega.tolist(),
        "omega_inv": im.inverse().tolist(),
        "quad_error_estimate": im.quad_error_estimate,
        "standard_errors": table,
    }
    _write_text(args.out, cfgmod.dumps(out) + "\n")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    spec = _spec_from_args(args)
    if args.points < 1:
        raise _InputError("--points must be positive")
    lam = np.pi * np.arange(1, args.points + 1) / args.points
    f = spectral_density(spec, lam)
    lines = ["lambda,f"] + [f"{a:.17g},{b:.17g}" for a, b in zip(lam, f)]
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="longmem", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a FARIMA path to CSV")
    _model_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("exact", "truncated-ma"))
    p.add_argument("--law", choices=("gaussian", "uniform", "student-t"), default="gaussian")
    p.add_argument("--df", type=float)
    p.add_argument("--emit-innovations", action="store_true")
    p.add_argument("--innovations-out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="CSS or Whittle estimate from a CSV series")
    p.add_argument("input")
    p.add_argument("--estimator", choices=("css", "whittle"), default="css")
    p.add_argument("--mean-correct", choices=("on", "off"), default="on")
    p.add_argument("--p", type=int, default=0, help="AR order")
    p.add_argument("--q", type=int, default=0, help="MA order")
    p.add_argument("--delta", type=float, help="extra start value for delta")
    p.add_argument("--ar", help="extra start AR coefficients")
    p.add_argument("--ma", help="extra start MA coefficients")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("montecarlo", help="run a Monte Carlo experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--replications", type=int)
    p.add_argument("--out")
    p.add_argument("--csv", help="dump per-replication estimates")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("info", help="information matrix and standard-error table")
    _model_args(p)
    p.add_argument("--n", help="comma-separated sample sizes")
    p.add_argument("--out")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("spectrum", help="spectral density on a grid excluding zero")
    _model_args(p)
    p.add_argument("--points", type=int, default=256)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, ContractError, _InputError) as exc:
        sys.stderr.write(f"longmem {args.command}: {exc}\n")
        return EXIT_INPUT
    except LongMemoryError as exc:
        sys.stderr.write(f"longmem {args.command}: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
