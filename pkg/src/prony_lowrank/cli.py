"""Command-line front end.

Exit codes: 0 affirmative (member, bound holds, solved), 1 negative,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import experiments
from .errors import NoRealSolution, PronyError
from .prony import PronyProblem, prony_solve
from .sigma import Rejection, sample_P, sigma_membership
from .signal import Signal, moments

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


class InputError(Exception):
    pass


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_signal(path: str) -> Signal:
    obj = _load_json(path)
    try:
        return Signal.from_json(obj)
    except PronyError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "nan" if math.isnan(v) else format(v, ".17g")
    return str(v)


def rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, allow_nan=True) + "\n"


def cmd_moments(args) -> int:
    F = _load_signal(args.signal_file)
    if args.count < 1:
        raise InputError("--count must be >= 1")
    _emit(_dump(moments(F, args.count).tolist()), args.out)
    return EXIT_OK


def cmd_sigma_check(args) -> int:
    F = _load_signal(args.signal_file)
    cert = sigma_membership(F, tol_rel=args.tol)
    _emit(_dump(cert.to_json()), args.out)
    return EXIT_OK if cert.member else EXIT_NEGATIVE


def cmd_sigma_sample(args) -> int:
    res = sample_P(args.nodes, args.branch, args.lam, args.u or [])
    if isinstance(res, Rejection):
        amps = None if res.amplitudes is None else np.asarray(res.amplitudes).tolist()
        _emit(_dump({"rejected": True, "reason": res.reason, "amplitudes": amps}), args.out)
        return EXIT_NEGATIVE
    _emit(_dump({"rejected": False, "signal": res.to_json()}), args.out)
    return EXIT_OK


def _spec_with_overrides(args):
    spec = _load_json(args.spec_file)
    if not isinstance(spec, dict):
        raise InputError("spec must be a JSON object")
    for key in ("seed", "samples", "restarts"):
        val = getattr(args, key, None)
        if val is not None:
            spec[key] = val
    return spec


def cmd_bound_sweep(args) -> int:
    spec = _spec_with_overrides(args)
    try:
        rows = experiments.bound_sweep(spec, jobs=args.jobs)
    except (experiments.SpecError, PronyError) as exc:
        raise InputError(str(exc)) from exc
    _emit(rows_to_csv(rows, experiments.BOUND_COLUMNS), args.out)
    bad = [r for r in rows if r["margin"] < 0 or r["restricted_margin"] < 0]
    for r in bad:
        print(
            f"FAILURE: negative margin d={r['d']} l={r['l']} eta={r['eta']} gamma={r['gamma']} "
            f"h={r['h']} sample={r['sample']}: distance={r['distance']!r} theta={r['theta']!r}",
            file=sys.stderr,
        )
    return EXIT_NEGATIVE if bad else EXIT_OK


def cmd_rank_drop(args) -> int:
    spec = _spec_with_overrides(args)
    try:
        rows = experiments.rank_drop(spec, jobs=args.jobs)
    except (experiments.SpecError, PronyError) as exc:
        raise InputError(str(exc)) from exc
    _emit(rows_to_csv(rows, experiments.RANK_COLUMNS), args.out)
    return EXIT_OK


def cmd_prony_solve(args) -> int:
    if args.moments_file:
        m = _load_json(args.moments_file)
    else:
        m = args.moments
    if not m:
        raise InputError("no moments given")
    l = args.nodes if args.nodes is not None else len(m) // 2
    try:
        sol = prony_solve(PronyProblem(np.asarray(m, dtype=float), l))
    except NoRealSolution as exc:
        _emit(_dump({"solved": False, "reason": str(exc)}), args.out)
        return EXIT_NEGATIVE
    except PronyError as exc:
        raise InputError(str(exc)) from exc
    _emit(_dump({"solved": True, **sol.to_json()}), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prony-lowrank", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("moments", help="print the first COUNT moments of a signal")
    sp.add_argument("signal_file")
    sp.add_argument("--count", type=int, default=None, help="number of moments (default 2d)")
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_moments)

    sigma = sub.add_parser("sigma", help="single-node exact fitting of m_0, m_1, m_2")
    ssub = sigma.add_subparsers(dest="sigma_command", required=True)
    sc = ssub.add_parser("check", help="membership certificate for a signal file")
    sc.add_argument("signal_file")
    sc.add_argument("--tol", type=float, default=1e-9, help="relative zero tolerance")
    sc.add_argument("-o", "--out")
    sc.set_defaults(func=cmd_sigma_check)
    ss = ssub.add_parser("sample", help="draw amplitudes from branch 1 or 2 for given nodes")
    ss.add_argument("--nodes", type=float, nargs="+", required=True)
    ss.add_argument("--branch", type=int, choices=(1, 2), required=True)
    ss.add_argument("--lam", type=float, default=1.0)
    ss.add_argument("--u", type=float, nargs="*", help="complement coordinates (d-2 values)")
    ss.add_argument("-o", "--out")
    ss.set_defaults(func=cmd_sigma_sample)

    bound = sub.add_parser("bound", help="lower-bound experiments")
    bsub = bound.add_subparsers(dest="bound_command", required=True)
    bs = bsub.add_parser("sweep", help="certificates vs. search oracle over a grid (CSV)")
    _sweep_args(bs)
    bs.add_argument("--restarts", type=int)
    bs.set_defaults(func=cmd_bound_sweep)

    rd = sub.add_parser("rank-drop", help="numerical Hankel rank of noisy clusters (CSV)")
    _sweep_args(rd)
    rd.set_defaults(func=cmd_rank_drop)

    prony = sub.add_parser("prony", help="classical Prony inversion")
    psub = prony.add_subparsers(dest="prony_command", required=True)
    ps = psub.add_parser("solve", help="recover a signal from 2l moments")
    src = ps.add_mutually_exclusive_group(required=True)
    src.add_argument("--moments", type=float, nargs="+")
    src.add_argument("--moments-file")
    ps.add_argument("--nodes", type=int, help="l (default: half the moment count)")
    ps.add_argument("-o", "--out")
    ps.set_defaults(func=cmd_prony_solve)
    return p


def _sweep_args(sp):
    sp.add_argument("spec_file", help="JSON spec with the parameter grid")
    sp.add_argument("-o", "--out", help="CSV path (default stdout)")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--jobs", type=int, default=1, help="worker processes")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "moments" and args.count is None:
            args.count = 2 * _load_signal(args.signal_file).d or 1
        return args.func(args)
    except (InputError, PronyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
