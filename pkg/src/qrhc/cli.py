"""Command-line front end: ``python -m qrhc <command> ...``.

Exit status is 0 when every check passes, 1 when any check fails and 2 for
usage or contract errors. Reports are JSON with floats written to 17
significant digits; repeated runs with the same arguments produce identical
bytes when ``--no-timestamp`` is given.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys

import numpy as np

from . import __version__
from .campaigns import (
    VERIFY_IDS,
    derivative_campaign,
    lsi_report,
    mixing_campaign,
    summarize,
    verify_campaign,
)
from .cube import majority_nicd
from .errors import CapacityError, ContractError, DomainError, SoundnessError
from .nicd import BASIS_FAMILIES, M_FAMILIES, entangled_basis_sweep, rows_to_csv
from .search import REGISTRY, parse_grid, sharpness_profile
from .verifiers import make_report

SCHEMA_VERSION = __version__


def _format_float(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return "%.17g" % x


def dumps(obj, indent=0):
    """JSON text with every float printed as ``%.17g``; non-finite floats become strings."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v, indent + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _document(args, command, params, reports, summary=None, extra=None):
    doc = {"spec_version": SCHEMA_VERSION, "command": command, "params": params}
    if not args.no_timestamp:
        doc["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    doc["reports"] = [r.to_dict() for r in reports]
    doc["summary"] = summary if summary is not None else summarize(reports)
    if extra:
        doc.update(extra)
    return doc


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _status(summary):
    return 0 if summary["fail_count"] == 0 else 1


def cmd_verify(args):
    reports = verify_campaign(args.ineq, trials=args.trials, seed=args.seed, qubits=args.qubits,
                              dim=args.dim, p=args.p, q=args.q, gamma=args.gamma, rtol=args.tol)
    params = {"ineq": args.ineq, "trials": args.trials, "seed": args.seed, "qubits": args.qubits,
              "dim": args.dim, "p": args.p, "q": args.q, "gamma": args.gamma, "tol": args.tol}
    return _document(args, "verify", params, reports)


def cmd_lsi(args):
    rep = lsi_report(args.qubits, restarts=args.restarts, seed=args.seed, budget=args.budget)
    params = {"qubits": args.qubits, "restarts": args.restarts, "seed": args.seed,
              "budget": args.budget}
    return _document(args, "lsi", params, [rep])


def cmd_derivative(args):
    reports = derivative_campaign(trials=args.trials, seed=args.seed, qubits=args.qubits, h=args.h)
    params = {"qubits": args.qubits, "trials": args.trials, "seed": args.seed, "h": args.h}
    return _document(args, "derivative", params, reports)


def cmd_mix(args):
    reports = mixing_campaign(trials=args.trials, seed=args.seed, qubits=args.qubits,
                              sigma=args.sigma, alpha=args.alpha, gamma=args.gamma)
    params = {"qubits": args.qubits, "sigma": args.sigma, "alpha": args.alpha,
              "gamma": args.gamma, "trials": args.trials, "seed": args.seed}
    return _document(args, "mix", params, reports)


def cmd_nicd(args):
    n = args.qubits
    measure = args.measure or ("majority" if n % 2 == 1 else "dictator")
    rows = entangled_basis_sweep(n, args.k, args.gamma, basis_families=(args.basis,),
                                 m_families=(measure,), seed=args.seed, c=args.c)
    reports = []
    if args.basis == "product" and measure == "majority":
        for row in rows:
            ref = majority_nicd(n, row["k"], row["gamma"])
            params = {"n": n, "k": row["k"], "gamma": row["gamma"]}
            diff = abs(row["p_all_M"] - ref)
            reports.append(make_report("nicd-classical-match", params, row["p_all_M"], ref,
                                       -diff, 1e-12))
    params = {"basis": args.basis, "measure": measure, "qubits": n, "k": args.k,
              "gamma": args.gamma, "c": args.c, "seed": args.seed}
    if args.out and args.out.endswith(".csv"):
        return rows_to_csv(rows), _status(summarize(reports))
    return _document(args, "nicd", params, reports, extra={"rows": rows})


def cmd_search(args):
    if args.ineq not in REGISTRY:
        raise ContractError(f"no search registered for {args.ineq!r}; known: {sorted(REGISTRY)}")
    gammas = parse_grid(args.gamma_grid)
    params = {"ineq": args.ineq, "p": args.p, "q": args.q, "gamma_grid": gammas,
              "qubits": args.qubits, "budget": args.budget, "restarts": args.restarts,
              "seed": args.seed}
    try:
        prof = sharpness_profile(args.ineq, args.p, args.q, gammas, n=args.qubits,
                                 budget=args.budget, seed=args.seed, restarts=args.restarts)
    except SoundnessError as exc:
        doc = {"spec_version": SCHEMA_VERSION, "command": "search", "params": params,
               "reports": [], "summary": {"pass_count": 0, "fail_count": 1, "min_slack": None},
               "error": str(exc)}
        return doc
    slacks = [r["min_slack"] for r in prof["rows"]]
    inside = [r for r in prof["rows"] if r["in_region"]]
    summary = {"pass_count": len(inside), "fail_count": 0,
               "min_slack": min(slacks) if slacks else None}
    doc = {"spec_version": SCHEMA_VERSION, "command": "search", "params": params}
    if not args.no_timestamp:
        doc["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    doc.update({"profile": prof, "reports": [], "summary": summary})
    return doc


def build_parser():
    parser = argparse.ArgumentParser(prog="qrhc", description="Numerical checks of quantum "
                                     "reverse hypercontractivity and its consequences.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--no-timestamp", action="store_true",
                        help="omit the timestamp so output is byte-reproducible")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="randomized campaign for one inequality")
    v.add_argument("--ineq", required=True, choices=VERIFY_IDS)
    v.add_argument("--p", type=float)
    v.add_argument("--q", type=float)
    v.add_argument("--gamma", type=float)
    v.add_argument("--qubits", type=int)
    v.add_argument("--dim", type=int)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--tol", type=float, default=None, help="relative tolerance")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("lsi", parents=[common], help="search for the 2-log-Sobolev constant")
    s.add_argument("--qubits", type=int, default=1)
    s.add_argument("--restarts", type=int, default=20)
    s.add_argument("--budget", type=int, default=400)
    s.set_defaults(func=cmd_lsi)

    dv = sub.add_parser("derivative", parents=[common],
                        help="norm derivative formula against finite differences")
    dv.add_argument("--qubits", type=int)
    dv.add_argument("--trials", type=int, default=100)
    dv.add_argument("--h", type=float, default=1e-4)
    dv.set_defaults(func=cmd_derivative)

    m = sub.add_parser("mix", parents=[common], help="subspace mixing bounds")
    m.add_argument("--qubits", type=int)
    m.add_argument("--sigma", type=float)
    m.add_argument("--alpha", type=float)
    m.add_argument("--gamma", type=float)
    m.add_argument("--trials", type=int, default=100)
    m.set_defaults(func=cmd_mix)

    nc = sub.add_parser("nicd", parents=[common], help="agreement probabilities of the k-player game")
    nc.add_argument("--basis", choices=BASIS_FAMILIES, default="product")
    nc.add_argument("--qubits", type=int, required=True)
    nc.add_argument("--k", type=int, nargs="+", required=True)
    nc.add_argument("--gamma", type=float, nargs="+", required=True)
    nc.add_argument("--measure", choices=M_FAMILIES, default=None,
                    help="measurement family (default: majority for odd n, else dictator)")
    nc.add_argument("--c", type=float, default=None, help="constant for the envelope column")
    nc.set_defaults(func=cmd_nicd)

    se = sub.add_parser("search", parents=[common], help="sharpness profile over a noise grid")
    se.add_argument("--ineq", required=True)
    se.add_argument("--p", type=float, required=True)
    se.add_argument("--q", type=float, required=True)
    se.add_argument("--gamma-grid", required=True, help="a:b:steps")
    se.add_argument("--qubits", type=int, default=1)
    se.add_argument("--budget", type=int, default=2000)
    se.add_argument("--restarts", type=int, default=4)
    se.set_defaults(func=cmd_search)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        result = args.func(args)
    except (ContractError, DomainError, CapacityError, ValueError) as exc:
        print(f"qrhc: error: {exc}", file=sys.stderr)
        return 2
    if isinstance(result, tuple):
        text, status = result
    else:
        text, status = dumps(result) + "\n", _status(result["summary"])
    _emit(text, args.out)
    return status


def main():
    sys.exit(run())
