"""Command-line front end.

Subcommands emit one CSV or JSON document (stdout or ``--output``).  Floats
are written with 12 significant digits so identical invocations produce
byte-identical files.

Exit status: 0 success, 1 failed self-check, 2 invalid argument,
3 search failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .cascade import (
    CHSH_LOCAL_BOUND,
    SVETLICHNY_LOCAL_BOUND,
    STATE_TOL,
    CascadeConfig,
    run_chsh_cascade,
    run_svetlichny_cascade,
)
from .errors import CascadeError, SearchFailed
from .measurements import (
    SVETLICHNY,
    SharpnessSchedule,
    check_theta,
    find_theta_n,
    gamma_schedule_chsh,
    gamma_schedule_svetlichny,
    scan_svetlichny_theta,
)
from .states import GhzState, SchmidtState, schmidt_L
from .verification import SUITES, run_suite

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_SEARCH, EXIT_IO = 0, 1, 2, 3, 4
THREADS_ENV = "NONLOCAL_CASCADE_THREADS"
TYPED_NORM_TOL = 1e-6

COLUMNS = {
    "chsh-cascade": ["k", "gamma_k", "simulated", "bound", "violated"],
    "svetlichny-cascade": ["k", "gamma_k", "simulated", "closed_form", "violated"],
    "find-theta": ["k", "gamma_k", "theta_n", "theta"],
    "verify": ["suite", "check", "error", "tolerance", "passed"],
}

# sweep quantity -> (parameters that may be swept, integer-valued ones)
SWEEP_PARAMS = {
    "chsh-gamma": ({"theta", "L", "epsilon"}, set()),
    "svetlichny-gamma": ({"theta", "sin2_2alpha", "epsilon"}, set()),
    "theta-n": ({"n", "L", "epsilon"}, {"n"}),
    "svetlichny-max-k": ({"sin2_2alpha", "epsilon"}, set()),
}


class InvalidArgument(CascadeError):
    pass


# --------------------------------------------------------------------------
# formatting
# --------------------------------------------------------------------------

def fmt_float(x: float) -> str:
    return format(float(x), ".12g")


def _rounded(x: float) -> float:
    return float(fmt_float(x))


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def _json_cell(v):
    if isinstance(v, float) and not isinstance(v, bool):
        return _rounded(v) if math.isfinite(v) else None
    return v


def render(rows: list[dict], columns: list[str], fmt: str, meta: dict) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_csv_cell(row.get(c)) for c in columns])
        return buf.getvalue()
    doc = {
        "meta": {**meta, "columns": columns},
        "rows": [{c: _json_cell(row.get(c)) for c in columns} for row in rows],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _violated(value: float, threshold: float) -> bool:
    # decided on the emitted digits so the flag can be recomputed from the file
    return _rounded(value) > threshold


# --------------------------------------------------------------------------
# argument helpers
# --------------------------------------------------------------------------

def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _theta_from_args(args):
    if getattr(args, "theta", None) is not None:
        return check_theta(args.theta)
    if getattr(args, "theta_frac_pi", None) is not None:
        return check_theta(args.theta_frac_pi * math.pi)
    return None


def _check_epsilon(epsilon: float) -> float:
    if not epsilon > 0:
        raise InvalidArgument(f"epsilon must be positive, got {epsilon!r}")
    return epsilon


def _schmidt_from_args(args) -> tuple[SchmidtState, dict]:
    extra = {}
    if args.normalize:
        st, factor = SchmidtState.normalized(args.coeffs, args.dim_a or 0, args.dim_b or 0)
        extra["normalization_factor"] = _rounded(factor)
    else:
        # decimals typed on a command line (0.70710678) miss unit norm by ~1e-9
        norm2 = math.fsum(c * c for c in args.coeffs)
        if abs(norm2 - 1.0) > TYPED_NORM_TOL:
            raise InvalidArgument(f"sum of squared coefficients is {norm2:.12g}, not 1 "
                                  f"(pass --normalize to rescale)")
        factor = 1.0 / math.sqrt(norm2)
        st = SchmidtState(tuple(c * factor for c in args.coeffs), args.dim_a or 0, args.dim_b or 0)
        if factor != 1.0:
            extra["normalization_factor"] = _rounded(factor)
    return st, extra


def _ghz_from_args(args) -> GhzState:
    if args.alpha is not None:
        g = GhzState(args.alpha)
    else:
        g = GhzState.from_sin2_2alpha(args.sin2_2alpha)
    if g.sin2alpha ** 2 <= 0.5:
        raise InvalidArgument(f"sin^2(2 alpha) must exceed 1/2 for a Svetlichny violation, "
                              f"got {g.sin2alpha ** 2:.12g}")
    return g


def _explicit_schedule(gammas, theta, n, scenario):
    if len(gammas) < n:
        raise InvalidArgument(f"--gammas gives {len(gammas)} values but --n is {n}")
    return SharpnessSchedule.explicit(gammas[:n], theta, scenario)


def _require_feasible(sched: SharpnessSchedule, n: int):
    if not sched.is_feasible(n):
        k = sched.n_feasible + 1
        raise SearchFailed(f"no feasible sharpness for k={k} at theta={fmt_float(sched.theta)}", k=k)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_chsh_cascade(args):
    st, extra = _schmidt_from_args(args)
    epsilon = _check_epsilon(args.epsilon)
    theta = _theta_from_args(args)
    L = schmidt_L(st)
    theta_n = None
    if args.gammas is not None:
        if theta is None:
            raise InvalidArgument("--gammas needs --theta or --theta-frac-pi")
        sched = _explicit_schedule(args.gammas, theta, args.n, "chsh")
    elif theta is None or args.auto_theta:
        if not L > 0:
            raise InvalidArgument("state has L = 0; no Bob can violate CHSH with these measurements")
        theta_n, sched = find_theta_n(args.n, L, epsilon)
    else:
        if not L > 0:
            raise InvalidArgument("state has L = 0; no Bob can violate CHSH with these measurements")
        sched = gamma_schedule_chsh(L, epsilon, theta, args.n)
        _require_feasible(sched, args.n)
    result = run_chsh_cascade(CascadeConfig(st, sched))
    rows = [
        {"k": s.k, "gamma_k": s.gamma, "simulated": s.simulated, "bound": s.closed_form,
         "violated": _violated(s.simulated, CHSH_LOCAL_BOUND)}
        for s in result.steps
    ]
    meta = {"L": _rounded(L), "theta": _rounded(sched.theta), **extra}
    if theta_n is not None:
        meta["theta_n"] = _rounded(theta_n)
    return rows, meta


def cmd_svetlichny_cascade(args):
    g = _ghz_from_args(args)
    epsilon = _check_epsilon(args.epsilon)
    theta = _theta_from_args(args)
    if args.gammas is not None:
        if theta is None:
            raise InvalidArgument("--gammas needs --theta or --theta-frac-pi")
        sched = _explicit_schedule(args.gammas, theta, args.n, SVETLICHNY)
    elif theta is None or args.auto_theta:
        theta, sched = scan_svetlichny_theta(g.alpha, args.n, epsilon)
    else:
        sched = gamma_schedule_svetlichny(g.alpha, epsilon, theta, args.n)
        _require_feasible(sched, args.n)
    result = run_svetlichny_cascade(CascadeConfig(g, sched))
    rows = [
        {"k": s.k, "gamma_k": s.gamma, "simulated": s.simulated, "closed_form": s.closed_form,
         "violated": _violated(s.simulated, SVETLICHNY_LOCAL_BOUND)}
        for s in result.steps
    ]
    return rows, {"alpha": _rounded(g.alpha), "sin2_2alpha": _rounded(g.sin2alpha ** 2),
                  "theta": _rounded(sched.theta)}


def cmd_find_theta(args):
    epsilon = _check_epsilon(args.epsilon)
    if args.coeffs is not None:
        st, extra = _schmidt_from_args(args)
        L = schmidt_L(st)
    else:
        L, extra = args.L, {}
    if not 0 < L <= 1:
        raise InvalidArgument(f"L must lie in (0, 1], got {L!r}")
    theta_n, sched = find_theta_n(args.n, L, epsilon)
    rows = [{"k": k, "gamma_k": gk, "theta_n": theta_n, "theta": sched.theta}
            for k, gk in enumerate(sched.finite, start=1)]
    return rows, {"L": _rounded(L), **extra}


def parse_range(text: str, integer: bool = False):
    """``name=start:stop:steps`` -> ``(name, values)`` with ``steps`` inclusive points."""
    name, sep, rest = text.partition("=")
    parts = rest.split(":")
    if not sep or len(parts) != 3:
        raise InvalidArgument(f"expected NAME=START:STOP:STEPS, got {text!r}")
    try:
        start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InvalidArgument(f"bad range {text!r}") from None
    if steps < 1:
        raise InvalidArgument(f"steps must be positive in {text!r}")
    if steps == 1:
        values = [start]
    else:
        values = [start + (stop - start) * i / (steps - 1) for i in range(steps)]
    if integer:
        values = [int(round(v)) for v in values]
    return name.strip(), values


def _sweep_point(quantity, point, args):
    L = point.get("L", args.L)
    epsilon = _check_epsilon(point.get("epsilon", args.epsilon))
    out = {}
    if quantity == "chsh-gamma":
        sched = gamma_schedule_chsh(L, epsilon, check_theta(point.get("theta", args.theta)), args.n)
        out.update({f"gamma_{k}": g for k, g in enumerate(sched.gammas, start=1)})
    elif quantity == "svetlichny-gamma":
        g = GhzState.from_sin2_2alpha(point.get("sin2_2alpha", args.sin2_2alpha))
        sched = gamma_schedule_svetlichny(g.alpha, epsilon, check_theta(point.get("theta", args.theta)), args.n)
        out.update({f"gamma_{k}": v for k, v in enumerate(sched.gammas, start=1)})
    elif quantity == "theta-n":
        n = int(point.get("n", args.n))
        try:
            theta_n, sched = find_theta_n(n, L, epsilon)
            out.update(theta_n=theta_n, theta=sched.theta)
        except SearchFailed:
            out.update(theta_n=None, theta=None)
    elif quantity == "svetlichny-max-k":
        g = GhzState.from_sin2_2alpha(point.get("sin2_2alpha", args.sin2_2alpha))
        best, best_theta = 0, None
        for k in range(1, args.n + 1):
            try:
                theta, sched = scan_svetlichny_theta(g.alpha, k, epsilon, grid_points=args.grid_points)
            except SearchFailed:
                break
            result = run_svetlichny_cascade(CascadeConfig(g, sched))
            if not result.all_violated:
                break
            best, best_theta = k, theta
        out.update(max_k=best, theta=best_theta)
    return out


def _sweep_columns(quantity, n):
    if quantity in ("chsh-gamma", "svetlichny-gamma"):
        return [f"gamma_{k}" for k in range(1, n + 1)]
    if quantity == "theta-n":
        return ["theta_n", "theta"]
    return ["max_k", "theta"]


def sweep_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        value = int(raw)
    except ValueError:
        raise InvalidArgument(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 0:
        raise InvalidArgument(f"{THREADS_ENV} must be >= 0, got {value}")
    return value or (os.cpu_count() or 1)


def cmd_sweep(args):
    allowed, integer = SWEEP_PARAMS[args.quantity]
    if not 1 <= len(args.param) <= 2:
        raise InvalidArgument("sweep takes one or two --param ranges")
    axes = []
    for text in args.param:
        name, values = parse_range(text, integer=text.partition("=")[0].strip() in integer)
        if name not in allowed:
            raise InvalidArgument(f"{args.quantity} cannot sweep {name!r}; choose from {sorted(allowed)}")
        if any(name == a[0] for a in axes):
            raise InvalidArgument(f"parameter {name!r} given twice")
        axes.append((name, values))
    names = [a[0] for a in axes]
    points = [dict(zip(names, combo)) for combo in itertools.product(*(a[1] for a in axes))]
    # validate once up front so bad ranges fail before any worker starts
    for p in points:
        if "theta" in p:
            check_theta(p["theta"])
        if "sin2_2alpha" in p:
            GhzState.from_sin2_2alpha(p["sin2_2alpha"])
        if "epsilon" in p:
            _check_epsilon(p["epsilon"])
        if "L" in p and not 0 < p["L"] <= 1:
            raise InvalidArgument(f"L must lie in (0, 1], got {p['L']!r}")
        if "n" in p and p["n"] < 1:
            raise InvalidArgument(f"n must be positive, got {p['n']!r}")
    with ThreadPoolExecutor(max_workers=sweep_threads()) as pool:
        outputs = list(pool.map(lambda p: _sweep_point(args.quantity, p, args), points))
    rows = [{**p, **o} for p, o in zip(points, outputs)]
    columns = names + _sweep_columns(args.quantity, args.n)
    return rows, {"quantity": args.quantity}, columns


def cmd_verify(args):
    checks = run_suite(args.suite)
    rows = [{"suite": c.suite, "check": c.name, "error": c.error, "tolerance": c.tolerance,
             "passed": c.passed} for c in checks]
    return rows, {"all_passed": all(c.passed for c in checks)}


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _add_output(p):
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--output", "-o", help="write to this file instead of stdout")


def _add_theta(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--theta", type=float, help="measurement angle in radians, in (0, pi/4]")
    g.add_argument("--theta-frac-pi", type=float, help="measurement angle as a fraction of pi")
    p.add_argument("--auto-theta", action="store_true", help="search the angle (default when none given)")


def _add_schmidt(p, required=True):
    p.add_argument("--coeffs", type=_float_list, required=required,
                   help="Schmidt coefficients, comma separated, non-increasing")
    p.add_argument("--dim-a", type=int, help="Alice's dimension s (default: number of coefficients)")
    p.add_argument("--dim-b", type=int, help="Bob's dimension t (default: s)")
    p.add_argument("--normalize", action="store_true", help="sort and rescale the coefficients")


def _add_ghz(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--sin2-2alpha", type=float, help="sin^2(2 alpha) of the generalized GHZ state")
    g.add_argument("--alpha", type=float, help="GHZ angle alpha in radians")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonlocal-cascade",
        description="Sequential sharing of CHSH and Svetlichny nonlocality.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chsh-cascade", help="Alice and n sequential Bobs on a Schmidt state",
                       description="CSV columns: " + ",".join(COLUMNS["chsh-cascade"]))
    _add_schmidt(p)
    p.add_argument("--n", type=_positive_int, required=True, help="number of Bobs")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--gammas", type=_float_list, help="explicit sharpness values instead of the recursion")
    _add_theta(p)
    _add_output(p)

    p = sub.add_parser("svetlichny-cascade", help="Alice, Bob and n sequential Charlies on a GHZ state",
                       description="CSV columns: " + ",".join(COLUMNS["svetlichny-cascade"]))
    _add_ghz(p)
    p.add_argument("--n", type=_positive_int, required=True, help="number of Charlies")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--gammas", type=_float_list, help="explicit sharpness values instead of the recursion")
    _add_theta(p)
    _add_output(p)

    p = sub.add_parser("find-theta", help="angle range that keeps n Bobs below sharpness one",
                       description="CSV columns: " + ",".join(COLUMNS["find-theta"]))
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--L", type=float, help="Schmidt pairing quantity L")
    src.add_argument("--coeffs", type=_float_list, help="Schmidt coefficients (L is derived)")
    p.add_argument("--dim-a", type=int)
    p.add_argument("--dim-b", type=int)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--epsilon", type=float, default=0.01)
    _add_output(p)

    p = sub.add_parser(
        "sweep", help="evaluate a quantity over a parameter grid",
        description=(
            "Quantities and sweepable parameters:\n"
            "  chsh-gamma        theta, L, epsilon     -> gamma_1..gamma_n\n"
            "  svetlichny-gamma  theta, sin2_2alpha, epsilon -> gamma_1..gamma_n\n"
            "  theta-n           n, L, epsilon         -> theta_n, theta\n"
            "  svetlichny-max-k  sin2_2alpha, epsilon  -> max_k, theta  (k up to --n)\n"
            "Rows follow the Cartesian product of the ranges, first --param outermost.\n"
            f"{THREADS_ENV} caps worker threads (0 = one per CPU)."),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("quantity", choices=sorted(SWEEP_PARAMS))
    p.add_argument("--param", action="append", default=[], metavar="NAME=START:STOP:STEPS")
    p.add_argument("--n", type=_positive_int, default=1)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--theta", type=float, default=math.pi / 4)
    p.add_argument("--sin2-2alpha", type=float, default=1.0)
    p.add_argument("--grid-points", type=_positive_int, default=10_000)
    _add_output(p)

    p = sub.add_parser("verify", help="closed-form versus simulation self-checks",
                       description="CSV columns: " + ",".join(COLUMNS["verify"]))
    p.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    _add_output(p)
    return parser


COMMANDS = {
    "chsh-cascade": cmd_chsh_cascade,
    "svetlichny-cascade": cmd_svetlichny_cascade,
    "find-theta": cmd_find_theta,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def _spec_echo(args) -> dict:
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in ("output", "format"):
            continue
        if isinstance(value, float):
            value = _rounded(value)
        elif isinstance(value, list):
            value = [_rounded(v) if isinstance(v, float) else v for v in value]
        out[key] = value
    return out


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        produced = COMMANDS[args.command](args)
    except SearchFailed as exc:
        return _fail(EXIT_SEARCH, str(exc))
    except CascadeError as exc:
        return _fail(EXIT_INVALID, str(exc))
    if len(produced) == 3:
        rows, extra, columns = produced
    else:
        rows, extra = produced
        columns = COLUMNS[args.command]
    meta = {
        "command": args.command,
        "version": __version__,
        "spec": _spec_echo(args),
        "tolerances": {"state": STATE_TOL, "float_digits": 12},
        **extra,
    }
    text = render(rows, columns, args.format, meta)
    try:
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write output: {exc}")
    if args.command == "verify" and not extra["all_passed"]:
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
