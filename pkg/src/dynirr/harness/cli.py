"""dynirr command line.

Exit codes: 0 success, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..dynamics import classify, describe_orbit, is_preperiodic
from ..errors import DynirrError, ParseError
from ..exactalg import res_decompose
from ..modp import DEFAULT_RABIN_CAP
from ..sieve import (
    DEFAULT_N_PARAM,
    abs_weight_mass,
    build_window_sets,
    compute_S,
    compute_T,
    default_level,
    default_t,
    inner_square,
    selberg_weights,
    sieve_indicator_sum,
)
from .parser import parse_poly, parse_rational
from .scan import (
    DEFAULT_DEPTH,
    ConfigError,
    ScanConfig,
    bound_check,
    decay_report,
    load_summary,
    record_line,
    run_scan,
)
from .verify import DEFAULT_SEED, verify_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _poly(text):
    try:
        return parse_poly(text)
    except ParseError as exc:
        raise UsageError(f"--poly: {exc}") from exc


def _dump(obj):
    print(json.dumps(obj, indent=2))


def cmd_classify(args) -> int:
    f = _poly(args.poly)
    info = classify(f)
    if args.json:
        _dump({"poly": str(f), **info.to_dict()})
        return EXIT_OK
    classes = [name for name, flag in (("P1", info.in_P1), ("P2", info.in_P2), ("P3", info.in_P3)) if flag]
    print(f"poly      {f}")
    print(f"classes   {', '.join(classes) or 'none'}")
    if info.gamma is not None:
        print(f"gamma     {info.gamma}")
        print(f"orbit     {json.dumps(describe_orbit(info.gamma_preperiodic))}")
    print(f"zero      {json.dumps(describe_orbit(info.zero_preperiodic))}")
    print(f"hypothesis holds: {info.hypothesis_holds}")
    return EXIT_OK


def cmd_orbit(args) -> int:
    f = _poly(args.poly)
    try:
        x0 = parse_rational(args.start)
    except ValueError as exc:
        raise UsageError(f"--start: {exc}") from exc
    _dump(describe_orbit(is_preperiodic(f, x0, args.max_steps)))
    return EXIT_OK


def cmd_resultants(args) -> int:
    f = _poly(args.poly)
    if not 1 <= args.n_from <= args.n_to:
        raise UsageError("need 1 <= --n-from <= --n-to")
    print("n,nu,u")
    for n in range(args.n_from, args.n_to + 1):
        rd = res_decompose(f, n)
        print(f"{rd.n},{rd.nu},{rd.u}")
    return EXIT_OK


def cmd_scan(args) -> int:
    f = _poly(args.poly)
    cfg = ScanConfig(f, args.q_lo, args.q_hi, depth=args.depth, rabin_cap=args.rabin_cap,
                     threads=args.threads, out_path=Path(args.out) if args.out else None)
    summary, verdicts = run_scan(cfg)
    if args.out:
        _dump(summary.to_dict())
    else:
        for v in verdicts:
            print(record_line(v))
        print(json.dumps(summary.to_dict()), file=sys.stderr)
    return EXIT_OK


def cmd_sums(args) -> int:
    f = _poly(args.poly)
    t = args.t if args.t is not None else default_t(f.degree, args.big_n)
    ws = build_window_sets(f, args.big_n, t)
    mode = "flipped" if args.flipped else "direct"
    res = compute_S(f, args.q_lo, args.q_hi, ws, mode)
    z = args.z if args.z is not None else default_level(args.q_hi)
    W = selberg_weights(z)
    T = compute_T(f, args.q_lo, args.q_hi, ws, W)
    out = {
        "poly": str(f), "mode": mode, "N_param": args.big_n, "t": t,
        "N_set": list(ws.N_set), "M_set": list(ws.M_set),
        "sign": ws.sign, "S": res.S, "z": z, "T": str(T), "T_float": float(T),
        "skipped": list(res.skipped),
    }
    try:
        out["bound"] = bound_check(f, args.q_lo, args.q_hi, args.big_n, t).to_dict()
    except AssertionError as exc:
        out["bound"] = {"holds": False, "error": str(exc)}
        _dump(out)
        return EXIT_FAIL
    _dump(out)
    return EXIT_OK


def cmd_sieve_check(args) -> int:
    W = selberg_weights(args.z)
    bad = [q for q in range(1, args.q_max + 1) if sieve_indicator_sum(q, W) != inner_square(q, W)]
    _dump({
        "z": W.z, "exact": W.exact, "support": len(W.combined),
        "max_support": max(W.combined), "abs_mass": float(abs_weight_mass(W)),
        "q_max": args.q_max, "quadratic_form_failures": bad[:20],
    })
    return EXIT_FAIL if bad else EXIT_OK


def cmd_verify(args) -> int:
    report = verify_suite(args.seed)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_report(args) -> int:
    paths = [p for p in args.inputs.split(",") if p]
    if not paths:
        raise UsageError("--in needs at least one file")
    summaries = [load_summary(p) for p in paths]
    Path(args.out).write_text(decay_report(summaries))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dynirr", description="Dynamical irreducibility experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="class membership and critical orbits")
    p.add_argument("--poly", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("orbit", help="decide pre-periodicity of a rational point")
    p.add_argument("--poly", required=True)
    p.add_argument("--start", required=True)
    p.add_argument("--max-steps", type=int, default=10_000)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("resultants", help="(nu, u) for a range of iterates")
    p.add_argument("--poly", required=True)
    p.add_argument("--n-from", type=int, required=True)
    p.add_argument("--n-to", type=int, required=True)
    p.set_defaults(func=cmd_resultants)

    p = sub.add_parser("scan", help="stability scan over a prime window")
    p.add_argument("--poly", required=True)
    p.add_argument("--q-lo", type=int, required=True)
    p.add_argument("--q-hi", type=int, required=True)
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--rabin-cap", type=int, default=DEFAULT_RABIN_CAP)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("sums", help="character sums S and T with the bound check")
    p.add_argument("--poly", required=True)
    p.add_argument("--q-lo", type=int, required=True)
    p.add_argument("--q-hi", type=int, required=True)
    p.add_argument("--big-n", type=int, default=DEFAULT_N_PARAM)
    p.add_argument("--t", type=int, default=None, help="default: largest t with d^(N+t) <= 2^14")
    p.add_argument("--z", type=int, default=None)
    p.add_argument("--flipped", action="store_true")
    p.set_defaults(func=cmd_sums)

    p = sub.add_parser("sieve-check", help="Selberg weight identities")
    p.add_argument("--z", type=int, required=True)
    p.add_argument("--q-max", type=int, default=10_000)
    p.set_defaults(func=cmd_sieve_check)

    p = sub.add_parser("verify", help="cross-module invariant suite")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="decay table from scan summaries")
    p.add_argument("--in", dest="inputs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, ParseError) as exc:
        print(f"dynirr {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as exc:
        print(f"dynirr {args.command}: check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (DynirrError, ValueError, OSError) as exc:
        print(f"dynirr {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
