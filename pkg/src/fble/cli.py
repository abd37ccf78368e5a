"""Command-line interface: ``eval``, ``sweep``, ``solve-rate`` and ``verify``.

Records go to stdout (or ``--out``) as CSV by default, JSON lines with
``--format json``.  Exit status is 0 on success, 2 on a usage or domain
error and 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import awgn_gaussian, awgn_spherical, binary_channels, mc_oracle
from ._types import (AwgnParams, BecParams, BscParams, CapabilityError, CodeParams,
                     DomainError, EvalOptions, NumericalError, PeResult)

FIELDS = ["channel", "ensemble", "N", "R", "M", "param", "method", "pe", "log10_pe",
          "is_lower_bound", "J_used", "quad_order", "rel_err_est", "clamp_count"]
CHANNELS = {
    "awgn-spherical": ("awgn", "spherical"),
    "awgn-gaussian": ("awgn", "gaussian"),
    "bsc": ("bsc", "iid-binary"),
    "bec": ("bec", "iid-binary"),
}
METHODS = {
    "awgn-spherical": ("auto", "exact", "approx", "median", "spb", "nct"),
    "awgn-gaussian": ("auto", "exact"),
    "bsc": ("auto", "exact", "pl", "pu"),
    "bec": ("auto", "exact", "pu"),
}
LOG10_FLOOR = 1e-300


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Point:
    channel: str
    N: int
    R: float | None
    M: float | None
    param: float

    def code(self) -> CodeParams:
        return CodeParams(int(self.N), R=self.R, M=self.M)

    def chan(self):
        if self.channel.startswith("awgn"):
            return AwgnParams(self.param)
        return (BscParams if self.channel == "bsc" else BecParams)(self.param)


def evaluate(pt: Point, method: str, opts: EvalOptions) -> PeResult:
    """One error-probability evaluation in the named method."""
    if method not in METHODS[pt.channel]:
        raise DomainError(f"method {method!r} not available for {pt.channel}")
    code, chan = pt.code(), pt.chan()
    if code.log2_M <= 0.0:
        return PeResult(pe=0.0, method=method, log_pe=-math.inf)
    if pt.channel == "awgn-spherical":
        if method in ("auto", "exact", "approx"):
            o = EvalOptions(method=method, tol=opts.tol, exact_nr_limit=opts.exact_nr_limit)
            return awgn_spherical.pe_exact(code, chan, o)
        if method == "median":
            return awgn_spherical.median_bound(code, chan, opts)
        if method == "spb":
            return awgn_spherical.sphere_packing_bound(code, chan, opts)
        return awgn_spherical.pe_via_noncentral_t(code, chan, opts)
    if pt.channel == "awgn-gaussian":
        return awgn_gaussian.pe_exact_gaussian(code, chan, opts)
    if pt.channel == "bsc":
        if method in ("pl", "pu"):
            lo, up = binary_channels._bsc_bounds_log(code, chan)
            lp = lo if method == "pl" else up
            return PeResult(pe=math.exp(lp), log_pe=lp, method=f"bsc-{method}",
                            is_lower_bound=method == "pl", J_used=1 if method == "pu" else 0)
        return binary_channels.bsc_pe_exact(code, chan, J=opts.J)
    if method == "pu":
        pu = binary_channels.bec_pu(code, chan)
        return PeResult(pe=pu, method="bec-pu", J_used=1)
    return binary_channels.bec_pe_exact(code, chan, J=opts.J)


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def make_record(pt: Point, res: PeResult | None) -> dict:
    ch, ens = CHANNELS[pt.channel]
    code = pt.code()
    rec = {"channel": ch, "ensemble": ens, "N": int(pt.N), "R": code.rate, "M": code.size,
           "param": float(pt.param), "method": None, "pe": None, "log10_pe": None,
           "is_lower_bound": None, "J_used": None, "quad_order": None, "rel_err_est": None,
           "clamp_count": None}
    if res is None:
        return rec
    lp = res.log_pe
    tiny = lp > -math.inf and res.pe < LOG10_FLOOR
    rec.update(method=res.method, log10_pe=lp / math.log(10.0), pe=None if tiny else res.pe,
               is_lower_bound=bool(res.is_lower_bound), J_used=int(res.J_used),
               quad_order=int(res.quad_order), rel_err_est=float(res.rel_err_est),
               clamp_count=int(res.clamp_count))
    return rec


class Writer:
    def __init__(self, stream, fmt: str):
        self.stream, self.fmt = stream, fmt
        if fmt == "csv":
            self._csv = csv.writer(stream, lineterminator="\n")
            self._csv.writerow(FIELDS)

    def write(self, rec: dict):
        if self.fmt == "csv":
            self._csv.writerow([_num(rec[k]) if k not in ("channel", "ensemble", "method")
                                else (rec[k] or "") for k in FIELDS])
        else:
            self.stream.write(json.dumps({k: rec[k] for k in FIELDS}) + "\n")


def parse_csv(text: str) -> list[dict]:
    """Inverse of the CSV writer (used to check the JSON round trip)."""
    ints = {"N", "J_used", "quad_order", "clamp_count"}
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        rec = {}
        for k in FIELDS:
            v = row[k]
            if k in ("channel", "ensemble", "method"):
                rec[k] = v or None
            elif v == "":
                rec[k] = None
            elif k == "is_lower_bound":
                rec[k] = v == "1"
            elif k in ints:
                rec[k] = int(v)
            else:
                rec[k] = float(v)
        out.append(rec)
    return out


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def parse_values(text: str, axis: str) -> list[float]:
    """Explicit ``a,b,c`` list or ``start:stop:count[:log]`` range."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
            raise DomainError(f"bad range spec {text!r}")
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise DomainError("range needs a positive count")
        if len(parts) == 4:
            if a <= 0 or b <= 0:
                raise DomainError("log range needs positive ends")
            vals = np.geomspace(a, b, n)
        else:
            vals = np.linspace(a, b, n)
    else:
        vals = np.array([float(v) for v in text.split(",") if v.strip()])
    if axis == "N":
        vals = np.round(vals)
    vals = [float(v) for v in vals]
    if not vals:
        raise DomainError("empty value list")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise DomainError("sweep values must be strictly increasing")
    return vals


def _terms(text: str):
    if text == "max":
        return None
    j = int(text)
    if j < 1:
        raise argparse.ArgumentTypeError("terms must be >= 1 or 'max'")
    return j


def _add_point_args(p, need_size=True):
    p.add_argument("channel", choices=sorted(CHANNELS))
    p.add_argument("--n", type=int)
    if need_size:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--rate", type=float)
        g.add_argument("--m", type=float)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--snr-db", type=float, help="10 log10 P")
    g.add_argument("--power", type=float, help="linear P")
    p.add_argument("--f", type=float, help="crossover or erasure probability")


def _add_common(p):
    p.add_argument("--terms", type=_terms, default=16, help="guessing terms J, or 'max'")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fble", description="Finite-blocklength error probabilities "
                     "of random code ensembles.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate one point")
    _add_point_args(p)
    p.add_argument("--method", default="auto")
    _add_common(p)

    p = sub.add_parser("sweep", help="evaluate a grid along one axis")
    _add_point_args(p)
    p.add_argument("--axis", choices=("N", "R", "P", "f"), required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--methods", default="auto", help="comma-separated method list")
    _add_common(p)

    p = sub.add_parser("solve-rate", help="rate reaching a target error probability")
    _add_point_args(p, need_size=False)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--method", default="auto")
    p.add_argument("--rate-max", type=float)
    _add_common(p)

    p = sub.add_parser("verify", help="compare analytic values with simulation oracles")
    _add_point_args(p)
    p.add_argument("--trials", type=int, default=10**5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    return parser


def _param(args) -> float:
    if args.channel.startswith("awgn"):
        if args.f is not None:
            raise DomainError("--f applies to binary channels")
        if args.snr_db is not None:
            return 10.0 ** (args.snr_db / 10.0)
        if args.power is None:
            raise DomainError("AWGN needs --snr-db or --power")
        return args.power
    if args.snr_db is not None or args.power is not None:
        raise DomainError("--snr-db/--power apply to AWGN channels")
    if args.f is None:
        raise DomainError(f"{args.channel} needs --f")
    return args.f


def _point(args, **over) -> Point:
    vals = dict(N=args.n, R=getattr(args, "rate", None), M=getattr(args, "m", None),
                param=None)
    try:
        vals["param"] = _param(args)
    except DomainError:
        if "param" not in over:
            raise
    vals.update(over)
    if vals["N"] is None:
        raise DomainError("--n is required")
    if vals["R"] is None and vals["M"] is None:
        raise DomainError("give --rate or --m")
    pt = Point(args.channel, int(vals["N"]), vals["R"], vals["M"], float(vals["param"]))
    pt.code(), pt.chan()
    return pt


def _opts(args) -> EvalOptions:
    return EvalOptions(tol=args.tol, J=args.terms)


def n_threads() -> int:
    env = os.environ.get("FBLE_THREADS")
    return max(1, int(env)) if env else (os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_eval(args, out) -> int:
    pt = _point(args)
    res = evaluate(pt, args.method, _opts(args))
    Writer(out, args.format).write(make_record(pt, res))
    return 0


def _cmd_sweep(args, out) -> int:
    methods = [m for m in args.methods.split(",") if m]
    if not methods:
        raise DomainError("empty method set")
    for m in methods:
        if m not in METHODS[args.channel]:
            raise DomainError(f"method {m!r} not available for {args.channel}")
    values = parse_values(args.values, args.axis)
    key = {"N": "N", "R": "R", "P": "param", "f": "param"}[args.axis]
    if args.axis == "P" and not args.channel.startswith("awgn"):
        raise DomainError("axis P needs an AWGN channel")
    if args.axis == "f" and args.channel.startswith("awgn"):
        raise DomainError("axis f needs a binary channel")
    points = []
    for v in values:
        over = {key: v}
        if key == "R":
            over["M"] = None
        points.append(_point(args, **over))
    opts = _opts(args)
    jobs = [(pt, m) for pt in points for m in methods]

    def run(job):
        pt, m = job
        try:
            return pt, evaluate(pt, m, opts), None
        except (NumericalError, CapabilityError, DomainError) as exc:
            return pt, None, f"{pt} {m}: {exc}"

    with ThreadPoolExecutor(min(n_threads(), len(jobs))) as pool:
        results = list(pool.map(run, jobs))
    w = Writer(out, args.format)
    failures = 0
    for (pt, res, err), (_, m) in zip(results, jobs):
        rec = make_record(pt, res)
        if res is None:
            failures += 1
            rec["method"] = m
            print(f"fble: {err}", file=sys.stderr)
        w.write(rec)
    return 3 if failures == len(jobs) else 0


def solve_rate(pt: Point, target: float, method: str, opts: EvalOptions,
               rate_max: float | None = None):
    """Bisect on R until Pe is within 1e-3 relative of ``target``."""
    if not 0.0 < target < 1.0:
        raise DomainError("target must lie in (0, 1)")
    if rate_max is None:
        rate_max = 1.0 if pt.channel in ("bsc", "bec") else math.log2(1.0 + pt.param)
    pe = lambda r: evaluate(Point(pt.channel, pt.N, r, None, pt.param), method, opts).pe
    lo, hi = 0.0, float(rate_max)
    p_hi = pe(hi)
    if p_hi < target:
        raise NumericalError(f"target not reached below rate {hi:g} (Pe = {p_hi:.3g})",
                             estimate=p_hi)
    p = p_hi
    r = hi
    while hi - lo > 1e-9:
        r = 0.5 * (lo + hi)
        p = pe(r)
        if abs(p - target) <= 1e-3 * target:
            break
        if p < target:
            lo = r
        else:
            hi = r
    if abs(p - target) > 1e-3 * target and hi - lo > 1e-9:
        raise NumericalError("rate bisection did not converge", estimate=p)
    return r, p


def _cmd_solve(args, out) -> int:
    pt = _point(args, R=0.0, M=None)
    opts = _opts(args)
    r, p = solve_rate(pt, args.target, args.method, opts, args.rate_max)
    res = evaluate(Point(pt.channel, pt.N, r, None, pt.param), args.method, opts)
    res.diagnostics["target_pe"] = args.target
    Writer(out, args.format).write(make_record(Point(pt.channel, pt.N, r, None, pt.param), res))
    return 0


def _cmd_verify(args, out) -> int:
    pt = _point(args)
    code, chan = pt.code(), pt.chan()
    cfg = mc_oracle.McConfig(trials=args.trials, seed=args.seed)
    opts = EvalOptions(J=None)
    if pt.channel == "awgn-spherical":
        est, se = mc_oracle.mc_spherical(code, chan, cfg)
        exact = evaluate(pt, "exact", opts).pe
    elif pt.channel == "awgn-gaussian":
        est, se = mc_oracle.mc_gaussian(code, chan, cfg)
        exact = evaluate(pt, "exact", opts).pe
    elif pt.channel == "bsc":
        est, se = mc_oracle.mc_bsc_semianalytic(code, chan, cfg)
        exact = evaluate(pt, "exact", opts).pe
    else:
        est, se = mc_oracle.mc_bec_semianalytic(code, chan, cfg)
        exact = evaluate(pt, "exact", opts).pe
    z = (est - exact) / se if se > 0 else (0.0 if est == exact else math.inf)
    cw = csv.writer(out, lineterminator="\n")
    cw.writerow(["channel", "N", "M", "param", "analytic", "oracle", "stderr", "z"])
    cw.writerow([pt.channel, pt.N, _num(code.size), _num(pt.param), _num(exact), _num(est),
                 _num(se), _num(z)])
    return 0 if abs(z) <= 4.0 else 3


COMMANDS = {"eval": _cmd_eval, "sweep": _cmd_sweep, "solve-rate": _cmd_solve,
            "verify": _cmd_verify}


def run(argv) -> int:
    """Dispatch ``argv``; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except UsageError as exc:
        print(f"fble: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        return COMMANDS[args.command](args, out)
    except DomainError as exc:
        print(f"fble: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, CapabilityError) as exc:
        print(f"fble: numerical failure: {exc}", file=sys.stderr)
        return 3
    finally:
        if args.out:
            out.close()


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
