"""Command-line interface emitting CSV.

Exit codes: 0 success, 2 domain error, 3 internal invariant violation.
"""
import argparse
import csv
import io
import math
import sys

import numpy as np

from . import analytic
from .errors import DomainError, InvariantError
from .keyrate import HardwareParams, RepeaterConfig, Setup, key_rates
from .oracle.montecarlo import STRATEGIES, mc_repeater
from .rates import link_budget, probabilistic_rate, zn

__all__ = ["main", "build_parser", "keyrate_row", "sweep_rows", "KEYRATE_COLUMNS", "METRIC_COLUMNS"]

DEFAULTS = {
    Setup.OQR: {"l_total": 600.0, "p_g": 0.99},
    Setup.HQR: {"l_total": 300.0, "p_g": 0.995},
}
PARAM_COLUMNS = ["setup", "l_total", "n", "k", "p_g", "eta_d", "f0", "alpha", "c_fiber"]
METRIC_COLUMNS = [
    "rate_rep", "q_x", "q_z", "q_z_di", "s", "r_dd", "r_di", "key_dd", "key_di", "f_final",
]
KEYRATE_COLUMNS = PARAM_COLUMNS + METRIC_COLUMNS + ["c1", "c2", "c3", "c4"]
SWEEPABLE = ("f0", "p_g", "eta_d", "l_total", "n", "k")
UNITS_COMMENT = "# units: l_total km, c_fiber m/s, alpha dB/km, rates Hz; all other columns dimensionless"


class UsageError(DomainError):
    """A flag value is outside its domain."""


def fmt(v):
    if v is None or v == "":
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return ""
        return repr(v + 0.0)
    return str(v)


def write_csv(out, columns, rows, comments=()):
    for line in comments:
        out.write(line + "\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in columns])


# ------------------------------------------------------------------ keyrate


def params_from_args(args):
    setup = Setup(args.setup)
    d = DEFAULTS[setup]
    return {
        "setup": setup.value,
        "l_total": d["l_total"] if args.L is None else args.L,
        "n": args.n,
        "k": args.k,
        "p_g": d["p_g"] if args.pg is None else args.pg,
        "eta_d": args.eta,
        "f0": args.f0,
        "alpha": args.alpha,
        "c_fiber": args.c,
    }


def check_params(p):
    """Validate flag-level domains so errors can name the offending flag."""
    setup = Setup(p["setup"])

    def need(ok, flag, value, domain):
        if not ok:
            raise UsageError(f"--{flag}={value!r} outside {domain}")

    need(p["l_total"] > 0, "L", p["l_total"], "(0, inf)")
    need(float(p["n"]).is_integer() and p["n"] >= 0, "n", p["n"], "non-negative integers")
    need(float(p["k"]).is_integer() and p["k"] >= 0, "k", p["k"], "non-negative integers")
    need(p["alpha"] > 0, "alpha", p["alpha"], "(0, inf)")
    need(p["c_fiber"] > 0, "c", p["c_fiber"], "(0, inf)")
    if setup is Setup.OQR:
        need(0.0 <= p["p_g"] <= 1.0, "pg", p["p_g"], "[0, 1]")
        need(0.0 <= p["eta_d"] <= 1.0, "eta", p["eta_d"], "[0, 1]")
        need(0.25 <= p["f0"] <= 1.0, "f0", p["f0"], "[0.25, 1] for Werner sources")
    else:
        need(0.5 <= p["p_g"] <= 1.0, "pg", p["p_g"], "[0.5, 1] for the HQR gate model")
        need(0.0 < p["eta_d"] <= 1.0, "eta", p["eta_d"], "(0, 1]")
        need(0.5 <= p["f0"] <= 1.0, "f0", p["f0"], "[0.5, 1] for USD sources")


def keyrate_row(p):
    """Evaluate one parameter dict (keys as in PARAM_COLUMNS) into a CSV row dict."""
    check_params(p)
    config = RepeaterConfig(Setup(p["setup"]), float(p["l_total"]), int(p["n"]), int(p["k"]))
    hw = HardwareParams(p_g=float(p["p_g"]), eta_d=float(p["eta_d"]), f0=float(p["f0"]),
                        alpha=float(p["alpha"]), c_fiber=float(p["c_fiber"]))
    rec = key_rates(config, hw)
    if rec.key_dd < 0 or rec.key_di < 0 or not math.isfinite(rec.rate_rep):
        raise InvariantError(f"invalid key rates {rec.key_dd!r}, {rec.key_di!r}")
    row = dict(p)
    row.update({
        "n": int(p["n"]),
        "k": int(p["k"]),
        "rate_rep": rec.rate_rep,
        "q_x": rec.q_x,
        "q_z": rec.q_z,
        "q_z_di": rec.q_z_di,
        "s": rec.s,
        "r_dd": rec.r_dd,
        "r_di": rec.r_di,
        "key_dd": rec.key_dd,
        "key_di": rec.key_di,
        "f_final": rec.f_final,
    })
    row.update(zip(("c1", "c2", "c3", "c4"), rec.state_final))
    return row


def cmd_keyrate(args, out):
    row = keyrate_row(params_from_args(args))
    write_csv(out, KEYRATE_COLUMNS, [row], [UNITS_COMMENT])
    return 0


# -------------------------------------------------------------------- sweep


def sweep_values(param, start, stop, steps):
    if steps < 2:
        raise UsageError(f"--steps={steps!r} must be at least 2")
    values = np.linspace(start, stop, steps)
    if param in ("n", "k"):
        ints = np.rint(values)
        if np.any(np.abs(ints - values) > 1e-9):
            raise UsageError(f"--from/--to/--steps give non-integer values for {param}")
        return [int(v) for v in ints]
    return [float(v) for v in values]


def sweep_rows(base, param, values):
    """One row per grid value; out-of-domain rows keep empty metrics and a reason."""
    rows = []
    for v in values:
        p = dict(base)
        p[param] = v
        try:
            row = keyrate_row(p)
            row["reason"] = ""
        except DomainError as exc:
            row = dict(p)
            row["reason"] = str(exc)
        rows.append(row)
    return rows


def sweep_columns(param):
    return [param] + METRIC_COLUMNS + ["reason"] + [c for c in PARAM_COLUMNS if c != param]


def cmd_sweep(args, out):
    base = params_from_args(args)
    values = sweep_values(args.param, args.start, args.stop, args.steps)
    rows = sweep_rows(base, args.param, values)
    comments = [UNITS_COMMENT, f"# sweep over {args.param}: {args.start!r} .. {args.stop!r} in {args.steps} steps"]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(fh, sweep_columns(args.param), rows, comments)
    else:
        write_csv(out, sweep_columns(args.param), rows, comments)
    return 0


# ----------------------------------------------------------------------- mc


def mc_reference(p0, p_es, n):
    """Analytic mean attempts: Z_n when swapping is deterministic, else the recursion."""
    if all(p == 1.0 for p in p_es):
        return zn(n, p0), "Z_n"
    unit = link_budget(1.0, c_fiber=2e3)  # T0 = 1 s, so 1/rate is the mean attempt count
    return 1.0 / probabilistic_rate(unit, n, p0, p_es=p_es).rate_hz, "recursion"


def cmd_mc(args, out):
    p_es = list(args.pes or [])
    if len(p_es) == 1 and args.n > 1:
        p_es = p_es * args.n
    if not p_es:
        p_es = [1.0] * args.n
    if len(p_es) != args.n:
        raise UsageError(f"--pes given {len(p_es)} times; need 1 or n={args.n}")
    for p in p_es:
        if not 0.0 < p <= 1.0:
            raise UsageError(f"--pes={p!r} outside (0, 1]")
    if not 0.0 < args.p0 <= 1.0:
        raise UsageError(f"--p0={args.p0!r} outside (0, 1]")
    if args.trials < 1:
        raise UsageError(f"--trials={args.trials!r} must be positive")
    if args.n < 0:
        raise UsageError(f"--n={args.n!r} must be non-negative")
    strategy = {"waitall": "waitall", "immediate": "immediate"}[args.strategy]
    est = mc_repeater(args.p0, p_es, args.n, args.trials, args.seed, strategy)
    ref, kind = mc_reference(args.p0, p_es, args.n)
    row = {
        "strategy": est.strategy,
        "p0": args.p0,
        "n": args.n,
        "p_es": " ".join(fmt(p) for p in p_es),
        "trials": est.trials,
        "seed": est.seed,
        "mean_attempts": est.mean_attempts,
        "std_error": est.std_error,
        "formula": ref,
        "formula_kind": kind,
        "ratio": est.mean_attempts / ref,
    }
    cols = list(row)
    write_csv(out, cols, [row], ["# attempts in units of T0; ratio = mean_attempts / formula"])
    return 0


# ----------------------------------------------------------------- analytic

ANALYTIC_COLUMNS = [
    "p_g", "eta_d", "n", "n_bar", "chsh", "r_dd", "r_di",
    "d_eta_dd", "d_pg_dd", "d_n_dd", "d_eta_di", "d_pg_di", "d_n_di",
    "rel_eta_dd", "rel_pg_dd", "rel_n_dd", "rel_eta_di", "rel_pg_di", "rel_n_di", "reason",
]


def _ratio(num, den):
    if den == 0.0 or math.isnan(num):
        return math.nan
    return num / den


def analytic_row(p_g, eta_d, n):
    if not 0.0 < p_g <= 1.0:
        raise UsageError(f"--pg={p_g!r} outside (0, 1]")
    if not 0.0 < eta_d <= 1.0:
        raise UsageError(f"--eta={eta_d!r} outside (0, 1]")
    if n < 0:
        raise UsageError(f"--n={n!r} must be non-negative")
    rep = analytic.sensitivity(p_g, eta_d, n)
    row = {
        "p_g": p_g, "eta_d": eta_d, "n": n, "n_bar": analytic.n_bar(n), "chsh": rep.chsh,
        "r_dd": rep.r_dd,
        "d_eta_dd": rep.d_eta_dd, "d_pg_dd": rep.d_pg_dd, "d_n_dd": rep.d_n_dd,
        "rel_eta_dd": _ratio(rep.d_eta_dd, rep.r_dd),
        "rel_pg_dd": _ratio(rep.d_pg_dd, rep.r_dd),
        "rel_n_dd": _ratio(rep.d_n_dd, rep.r_dd),
        "reason": "",
    }
    if rep.chsh:
        row.update({
            "r_di": rep.r_di,
            "d_eta_di": rep.d_eta_di, "d_pg_di": rep.d_pg_di, "d_n_di": rep.d_n_di,
            "rel_eta_di": _ratio(rep.d_eta_di, rep.r_di),
            "rel_pg_di": _ratio(rep.d_pg_di, rep.r_di),
            "rel_n_di": _ratio(rep.d_n_di, rep.r_di),
        })
        if rep.r_di == 0.0:
            row["reason"] = "DI secret fraction is zero"
    else:
        row["reason"] = "no CHSH violation"
    return row


def cmd_analytic(args, out):
    rows = []
    if args.n_range is not None:
        lo, hi, steps = args.n_range
        if args.pg is None:
            raise UsageError("--n-range needs --pg")
        for n in np.linspace(lo, hi, int(steps)):
            rows.append(analytic_row(args.pg, args.eta, float(n)))
    else:
        if args.pg_range is None:
            raise UsageError("need --pg-range or --n-range")
        lo, hi, steps = args.pg_range
        for n in args.n or [1]:
            for p in np.linspace(lo, hi, int(steps)):
                rows.append(analytic_row(float(p), args.eta, n))
    write_csv(out, ANALYTIC_COLUMNS, rows, ["# pure sources, k = 0; rel_* = derivative / secret fraction"])
    return 0


# ------------------------------------------------------------------- parser


def _add_point_flags(p):
    p.add_argument("--setup", choices=[s.value for s in Setup], default="oqr")
    p.add_argument("--L", type=float, default=None, help="total distance [km] (default 600 oqr, 300 hqr)")
    p.add_argument("--n", type=int, default=2, help="nesting levels")
    p.add_argument("--k", type=int, default=0, help="distillation rounds")
    p.add_argument("--pg", type=float, default=None, help="gate quality (default 0.99 oqr, 0.995 hqr)")
    p.add_argument("--eta", type=float, default=0.975, help="detector efficiency")
    p.add_argument("--f0", type=float, default=0.95, help="initial fidelity")
    p.add_argument("--alpha", type=float, default=0.17, help="fiber attenuation [dB/km]")
    p.add_argument("--c", type=float, default=2e8, help="light speed in fiber [m/s]")


def build_parser():
    parser = argparse.ArgumentParser(prog="repkey", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keyrate", help="evaluate a single parameter point")
    _add_point_flags(p)
    p.set_defaults(func=cmd_keyrate)

    p = sub.add_parser("sweep", help="sweep one parameter and write a CSV")
    _add_point_flags(p)
    p.add_argument("--param", choices=SWEEPABLE, default="f0")
    p.add_argument("--from", dest="start", type=float, default=0.8)
    p.add_argument("--to", dest="stop", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=41)
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("mc", help="Monte Carlo waiting time of the repeater chain")
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy", choices=STRATEGIES, default="waitall")
    p.add_argument("--pes", type=float, action="append", help="swap success probability (repeatable)")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("analytic", help="closed-form secret fractions and derivatives")
    p.add_argument("--pg-range", nargs=3, type=float, metavar=("FROM", "TO", "STEPS"))
    p.add_argument("--n-range", nargs=3, type=float, metavar=("FROM", "TO", "STEPS"))
    p.add_argument("--pg", type=float, default=None)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--n", type=int, action="append", help="nesting level (repeatable)")
    p.set_defaults(func=cmd_analytic)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except InvariantError as exc:
        print(f"repkey: internal invariant violated: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        print(f"repkey: {exc}", file=sys.stderr)
        return 2
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
