"""Command-line interface.

Every subcommand produces a table. Numeric tables are computed twice, with
m and 2m quadrature nodes, and each row carries an ``agree_2m`` flag. Rows
and embedded assertions are written as CSV (with ``#`` metadata lines) or
as JSON ``{config, rows, assertions}``.

Exit status: 0 all assertions pass, 1 an assertion failed, 2 usage error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import __version__
from .arc import (arc_asymptotics, arc_verblunsky_closed, arc_widom_closed,
                  monotonicity_report)
from .extremal import (ConvergenceError, extremality_residual, lp_extremal, orthogonal_monic,
                       sharpness_experiment, verblunsky_from_measure, widom_record)
from .measures import (CircularArc, Interval, PreimageCircle, PreimageReal, UnitCircle,
                       apply_weight, build_equilibrium)
from .potential import capacity, relative_entropy
from .preimage import (PostconditionError, PullbackSpec, ReflectionlessSpec,
                       circle_power_extremal, gamma_widom_value, pullback, reflectionless_measure,
                       saturation_check)

DEFAULT_M = 512
SUITES = ("interval", "arc-monotone", "preimage-invariance", "circle-powers", "bounds")
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONV = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def parse_poly(text: str) -> np.ndarray:
    """'1,0,-2' -> [1, 0, -2]; complex entries like '0.5+1j' are allowed."""
    try:
        vals = [complex(tok.strip().replace(" ", "")) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad coefficient list {text!r}: {exc}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty coefficient list")
    arr = np.array(vals)
    return arr.real.copy() if not np.any(arr.imag) else arr


def parse_range(text: str) -> List[int]:
    """'1..5' -> [1..5], '3' -> [3], '1,4,6' -> [1, 4, 6]."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            out = list(range(int(lo), int(hi) + 1))
        else:
            out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return out


def parse_floats(text: str) -> List[float]:
    """'0.5,1,2' or 'a:b:k' (k equally spaced points)."""
    try:
        if ":" in text:
            a, b, k = text.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(k))]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _default_m() -> int:
    env = os.environ.get("WIDOM_QUAD_M")
    if env is None:
        return DEFAULT_M
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"WIDOM_QUAD_M must be an integer, got {env!r}") from None


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".15g")
    if isinstance(v, complex):
        return format(v, ".15g")
    return str(v)


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return float(format(f, ".15g")) if math.isfinite(f) else str(f)
    if isinstance(v, complex):
        return format(v, ".15g")
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


# ---------------------------------------------------------------------------
# run configuration and result table
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    options: Dict[str, object]
    m: int
    fmt: str = "csv"
    output: Optional[str] = None

    def __post_init__(self):
        if self.m < 8:
            raise UsageError(f"quadrature size must be >= 8, got {self.m}")
        if self.fmt not in ("csv", "json"):
            raise UsageError(f"unknown format {self.fmt!r}")


@dataclass
class Table:
    rows: List[dict] = field(default_factory=list)
    assertions: List[dict] = field(default_factory=list)

    def check(self, name: str, passed: bool, margin: float):
        self.assertions.append({"name": name, "pass": bool(passed), "margin": float(margin)})

    def within(self, name: str, value: float, expected: float, tol: float):
        err = abs(value - expected)
        self.check(name, err <= tol, tol - err)

    @property
    def ok(self) -> bool:
        return all(a["pass"] for a in self.assertions)


def _agree(a, b, tol) -> bool:
    if a is None or b is None:
        return True
    return abs(a - b) <= tol * max(1.0, abs(a))


def _two_sizes(cfg: RunConfig, build: Callable[[int], List[dict]], key: str,
               tol: float) -> List[dict]:
    """Rows at m, each flagged by agreement of ``key`` with the 2m rows."""
    rows = build(cfg.m)
    rows2 = build(2 * cfg.m)
    for r, r2 in zip(rows, rows2):
        r["agree_2m"] = _agree(r.get(key), r2.get(key), tol)
    return rows


# ---------------------------------------------------------------------------
# supports and weights from options
# ---------------------------------------------------------------------------

def _support(opts) -> object:
    given = [k for k in ("interval", "arc", "circle", "preimage") if opts.get(k) not in (None, False)]
    if len(given) != 1:
        raise UsageError("give exactly one of --interval, --arc, --circle, --preimage")
    k = given[0]
    try:
        if k == "interval":
            a, b = opts["interval"]
            return Interval(a, b)
        if k == "arc":
            return CircularArc(opts["arc"])
        if k == "circle":
            return UnitCircle()
        Q = opts["preimage"]
        return PreimageCircle(Q) if opts.get("base") == "circle" else PreimageReal(Q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _weight_fn(coeffs):
    """Weights are polynomials in x = Re z."""
    if coeffs is None:
        return None
    c = np.asarray(coeffs)
    return lambda z: npoly.polyval(np.real(z), c)


def _measure(opts, m):
    support = _support(opts)
    mu = build_equilibrium(support, m, circle_shift=opts.get("circle_shift", 0.0) or 0.0)
    w = _weight_fn(opts.get("weight"))
    return apply_weight(mu, w) if w is not None else mu


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_capacity(cfg: RunConfig) -> Table:
    support = _support(cfg.options)
    res = capacity(support)
    return Table([{"support": repr(support), "cap": res.cap, "method": res.method}])


def cmd_entropy(cfg: RunConfig) -> Table:
    opts = cfg.options
    if opts.get("weight") is None:
        raise UsageError("entropy needs --weight")

    def build(m):
        return [{"support": repr(_support(opts)), "S": relative_entropy(_measure(opts, m))}]

    return Table(_two_sizes(cfg, build, "S", opts["conv_tol"]))


def cmd_widom(cfg: RunConfig) -> Table:
    opts = cfg.options
    p = opts["p"]

    def build(m):
        mu = _measure(opts, m)
        return [widom_record(mu, p, n).as_row() for n in opts["n"]]

    t = Table(_two_sizes(cfg, build, "W", opts["conv_tol"]))
    for r in t.rows:
        if r["ratio"] is not None:
            t.check(f"lower_bound[n={r['n']}]", r["lower_bound_ok"], r["ratio"] - 1.0)
        if r["improved_bound_ok"] is not None:
            t.check(f"real_bound[n={r['n']}]", r["improved_bound_ok"], r["W"] ** 2 - 2.0)
    return t


def cmd_arc(cfg: RunConfig) -> Table:
    opts = cfg.options
    g = opts["gamma"]
    if opts["p"] != 2:
        raise UsageError("arc closed forms exist for p = 2 only")
    limit, inf, sup = arc_asymptotics(g)
    ns = opts["n"]

    def build(m):
        mu = build_equilibrium(CircularArc(g), m)
        cap = capacity(mu.support).cap
        return [{"n": n, "gamma": g, "W2": arc_widom_closed(g, n),
                 "W2_quadrature": (orthogonal_monic(mu, n)[1] / cap ** n) ** 2,
                 "inf": inf, "limit": limit} for n in ns]

    t = Table(_two_sizes(cfg, build, "W2_quadrature", opts["conv_tol"]))
    for r in t.rows:
        n = r["n"]
        t.check(f"inf_sup[n={n}]", inf - 1e-12 <= r["W2"] < sup,
                min(r["W2"] - inf + 1e-12, sup - r["W2"]))
        t.within(f"product_vs_direct[n={n}]", r["W2_quadrature"], r["W2"], opts["tol"])
    if 1 in ns:
        t.within("W2_n1_closed", t.rows[ns.index(1)]["W2"], inf, 1e-10)
    return t


def cmd_verblunsky(cfg: RunConfig) -> Table:
    opts = cfg.options
    count = opts["count"]
    closed = None
    if opts.get("arc") is not None:
        closed = arc_verblunsky_closed(opts["arc"], count).alphas.real

    def build(m):
        a = verblunsky_from_measure(_measure(opts, m), count).alphas
        rows = []
        for k in range(count):
            row = {"k": k, "alpha_re": a[k].real, "alpha_im": a[k].imag, "abs": abs(a[k])}
            if closed is not None:
                row["alpha_closed"] = closed[k]
            rows.append(row)
        return rows

    t = Table(_two_sizes(cfg, build, "alpha_re", opts["conv_tol"]))
    if closed is not None:
        for r in t.rows:
            t.within(f"closed_vs_quadrature[k={r['k']}]", r["alpha_re"], r["alpha_closed"],
                     opts["tol"])
    return t


def _weighted_interval(m, weight):
    mu = build_equilibrium(Interval(-1.0, 1.0), m)
    w = _weight_fn(weight)
    return apply_weight(mu, w) if w is not None else mu


def cmd_pullback(cfg: RunConfig) -> Table:
    opts = cfg.options
    T = opts["T"]
    try:
        spec = PullbackSpec(T, opts["R"]) if opts.get("R") is not None else PullbackSpec.equilibrium(T)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    N, p = spec.degree, opts["p"]

    def build(m):
        mu0 = _weighted_interval(m, opts.get("weight"))
        mu = pullback(spec, mu0)
        rows = []
        for n in opts["n"]:
            r0, r = widom_record(mu0, p, n), widom_record(mu, p, n * N)
            rows.append({"n": n, "nN": n * N, "W0": r0.W, "W": r.W, "S0": r0.S, "S": r.S,
                         "mass0": mu0.mass, "mass": mu.mass})
        return rows

    t = Table(_two_sizes(cfg, build, "W", opts["conv_tol"]))
    for r in t.rows:
        t.within(f"W_invariant[n={r['n']}]", r["W"] / r["W0"], 1.0, opts["tol"])
        if r["S"] is not None and r["S0"] is not None:
            t.within(f"S_invariant[n={r['n']}]", r["S"] / r["S0"], 1.0, opts["tol"])
        t.within(f"mass[n={r['n']}]", r["mass"], r["mass0"], 1e-12)
    return t


def cmd_reflectionless(cfg: RunConfig) -> Table:
    opts = cfg.options
    try:
        spec = ReflectionlessSpec(opts["T"], opts["d"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    N = spec.T.size - 1

    def build(m):
        mu = reflectionless_measure(spec, m)
        cap = capacity(mu.support).cap
        return [{"n": n, "degree": n * N,
                 "W2": (orthogonal_monic(mu, n * N)[1] / cap ** (n * N)) ** 2,
                 "provenance": mu.provenance} for n in opts["n"]]

    t = Table(_two_sizes(cfg, build, "W2", opts["conv_tol"]))
    for r in t.rows:
        t.within(f"W2_equals_2[n={r['n']}]", r["W2"], 2.0, opts["tol"])
    return t


def cmd_saturate(cfg: RunConfig) -> Table:
    opts = cfg.options

    def build(m):
        rep = saturation_check(opts["Q"], opts["variant"], p=opts["p"],
                               k_multiples=opts["k"], m=m, tol=opts["tol"])
        return [dict(r, variant=rep.variant) for r in rep.rows]

    t = Table(_two_sizes(cfg, build, "W", opts["conv_tol"]))
    for r in t.rows:
        t.within(f"saturation[n={r['n']}]", r["W"], r["expected"], opts["tol"])
    return t


def cmd_sharpness(cfg: RunConfig) -> Table:
    opts = cfg.options
    eps, degs = opts["eps"], sorted(opts["degrees"])

    def build(m):
        cells = sharpness_experiment(Interval(-2.0, 2.0), opts["p"], opts["n_single"], eps,
                                     degs, m=m)
        return [asdict(c) for c in cells]

    t = Table(_two_sizes(cfg, build, "ratio", opts["conv_tol"]))
    exact = [r for r in t.rows if r["degree"] is None]
    for r0, r1 in zip(exact, exact[1:]):
        t.check(f"decreasing[eps={r0['eps']:g}->{r1['eps']:g}]", r1["ratio"] < r0["ratio"],
                r0["ratio"] - r1["ratio"])
    for r in exact:
        t.check(f"lower_bound[eps={r['eps']:g}]", r["lower_bound_ok"], r["ratio"] - 1.0)
    return t


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------

def verify_interval(cfg: RunConfig) -> Table:
    opts = cfg.options
    p = opts["p"]
    a, b = opts.get("interval") or (-2.0, 2.0)
    expected = gamma_widom_value(p)

    def build(m):
        mu = build_equilibrium(Interval(a, b), m)
        cap = capacity(mu.support).cap
        return [{"n": n, "p": p, "Wp": (lp_extremal(mu, p, n)[1] / cap ** n) ** p,
                 "expected": expected} for n in opts["n"]]

    t = Table(_two_sizes(cfg, build, "Wp", opts["conv_tol"]))
    for r in t.rows:
        t.within(f"Wp_closed_form[n={r['n']}]", r["Wp"], expected, opts["tol"])
    return t


def verify_arc_monotone(cfg: RunConfig) -> Table:
    opts = cfg.options
    rep = monotonicity_report(opts["gamma_grid"], opts["n_max"])
    t = Table([{"assertion": k, "min_margin": v, "agree_2m": True}
               for k, v in rep.margins.items()])
    for k, v in rep.margins.items():
        t.check(k, v > 0, v)
    return t


def verify_preimage_invariance(cfg: RunConfig) -> Table:
    return cmd_pullback(cfg)


def verify_circle_powers(cfg: RunConfig) -> Table:
    opts = cfg.options
    N, p = opts["N"], opts["p"]
    spec = PullbackSpec.equilibrium(np.eye(N + 1)[N])

    def build(m):
        mu0 = apply_weight(build_equilibrium(UnitCircle(), m, circle_shift=0.5),
                           lambda z: 1.0 + np.real(z))
        mu = pullback(spec, mu0)
        rows = []
        for n in opts["n"]:
            Tn, t0 = lp_extremal(mu0, p, n)
            W0 = t0 / capacity(mu0.support).cap ** n
            cap = capacity(mu.support).cap
            for ell in range(N):
                if ell + n * N == 0:
                    continue
                S = circle_power_extremal(Tn, ell, N, mu, p)
                ns = float(np.dot(mu.weights, np.abs(S(mu.nodes)) ** p)) ** (1.0 / p)
                rows.append({"n": n, "ell": ell, "degree": ell + n * N,
                             "residual": extremality_residual(mu, p, S),
                             "W": ns / cap ** (ell + n * N), "W_expected": cap ** (-ell) * W0})
        return rows

    t = Table(_two_sizes(cfg, build, "W", opts["conv_tol"]))
    for r in t.rows:
        tag = f"[n={r['n']},l={r['ell']}]"
        t.check("residual" + tag, r["residual"] < opts["tol"], opts["tol"] - r["residual"])
        t.within("W_relation" + tag, r["W"], r["W_expected"], opts["tol"])
    return t


def verify_bounds(cfg: RunConfig) -> Table:
    opts = cfg.options
    rng = np.random.default_rng(opts["seed"])
    weights = [random_positive_weight(rng, 6) for _ in range(opts["count"])]

    def build(m):
        base = build_equilibrium(Interval(-2.0, 2.0), m)
        rows = []
        for i, c in enumerate(weights):
            mu = apply_weight(base, c)
            for p in opts["p_list"]:
                for n in opts["n"]:
                    r = widom_record(mu, p, n)
                    rows.append({"weight": i, "p": p, "n": n, "ratio": r.ratio})
        return rows

    t = Table(_two_sizes(cfg, build, "ratio", opts["conv_tol"]))
    worst = min(r["ratio"] for r in t.rows)
    t.check("universal_lower_bound", worst >= 1 - 1e-8, worst - (1 - 1e-8))
    return t


def random_positive_weight(rng: np.random.Generator, max_degree: int) -> np.ndarray:
    """A real polynomial of degree <= max_degree, positive on [-2, 2].

    Complex-conjugate root pairs off the real axis and, for odd degree, one
    real root outside [-2, 2]; the leading coefficient makes it positive.
    """
    d = int(rng.integers(0, max_degree + 1))
    half = rng.uniform(-3, 3, d // 2) + 1j * rng.uniform(0.05, 1.0, d // 2)
    c = np.real(npoly.polyfromroots(np.concatenate([half, half.conj()])))
    if d % 2:
        c = npoly.polymul(c, [rng.uniform(2.5, 4.0), 1.0])
    return c * rng.uniform(0.5, 2.0)


VERIFY = {"interval": verify_interval, "arc-monotone": verify_arc_monotone,
          "preimage-invariance": verify_preimage_invariance,
          "circle-powers": verify_circle_powers, "bounds": verify_bounds}

COMMANDS = {"capacity": cmd_capacity, "entropy": cmd_entropy, "widom": cmd_widom,
            "arc": cmd_arc, "verblunsky": cmd_verblunsky, "pullback": cmd_pullback,
            "reflectionless": cmd_reflectionless, "saturate": cmd_saturate,
            "sharpness": cmd_sharpness}


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, tol: float = 1e-8):
    p.add_argument("--m", type=int, default=None,
                   help="quadrature nodes (default $WIDOM_QUAD_M or 512)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", default=None, help="write to this file instead of stdout")
    p.add_argument("--tol", type=float, default=tol, help="assertion tolerance")
    p.add_argument("--conv-tol", type=float, default=1e-6,
                   help="relative tolerance of the m vs 2m agreement flag")


def _add_support(p: argparse.ArgumentParser, weight=True):
    p.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"))
    p.add_argument("--arc", type=float, metavar="GAMMA")
    p.add_argument("--circle", action="store_true")
    p.add_argument("--preimage", type=parse_poly, metavar="COEFFS",
                   help="pre-image of [-1,1] (or of the circle with --base circle)")
    p.add_argument("--base", choices=("interval", "circle"), default="interval")
    p.add_argument("--circle-shift", type=float, default=0.0)
    if weight:
        p.add_argument("--weight", type=parse_poly, default=None,
                       help="weight polynomial in x = Re z, constant term first")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="widom", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"widom {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="logarithmic capacity of a set")
    _add_support(p, weight=False)
    _add_common(p)

    p = sub.add_parser("entropy", help="relative entropy of a weighted equilibrium measure")
    _add_support(p)
    _add_common(p)

    p = sub.add_parser("widom", help="Widom factors of a weighted equilibrium measure")
    _add_support(p)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--n", type=parse_range, default=[1])
    _add_common(p)

    p = sub.add_parser("arc", help="closed-form Widom factors on a circular arc")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--n", type=parse_range, default=[1])
    _add_common(p)

    p = sub.add_parser("verblunsky", help="Verblunsky coefficients of a circle or arc measure")
    _add_support(p)
    p.add_argument("--count", type=int, default=10)
    _add_common(p)

    p = sub.add_parser("pullback", help="invariance under polynomial pull-back")
    p.add_argument("--T", type=parse_poly, required=True)
    p.add_argument("--R", type=parse_poly, default=None, help="default T'/deg T")
    p.add_argument("--weight", type=parse_poly, default=None,
                   help="weight of the base measure on [-1,1]")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--n", type=parse_range, default=[1, 2, 3, 4])
    _add_common(p, tol=1e-7)

    p = sub.add_parser("reflectionless", help="reflectionless measures on T^{-1}([-1,1])")
    p.add_argument("--T", type=parse_poly, required=True)
    p.add_argument("--d", type=parse_floats, required=True, help="one point per gap")
    p.add_argument("--n", type=parse_range, default=[1, 2, 3])
    _add_common(p, tol=1e-7)

    p = sub.add_parser("saturate", help="saturation of the lower bounds on pre-images")
    p.add_argument("--Q", type=parse_poly, required=True)
    p.add_argument("--variant", choices=("real-interval", "circle"), default="real-interval")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--k", type=parse_range, default=[1])
    _add_common(p)

    p = sub.add_parser("sharpness", help="ratio W^p/S for weights concentrating at 0")
    p.add_argument("--eps", type=parse_floats, default=[1, 0.3, 0.1, 0.03, 0.01])
    p.add_argument("--degrees", type=parse_range, default=[64, 256, 1024])
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--n", dest="n_single", type=int, default=1)
    _add_common(p, tol=1e-3)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--n", type=parse_range, default=None)
    p.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"), default=None)
    p.add_argument("--gamma-grid", type=parse_floats, default=None)
    p.add_argument("--n-max", type=int, default=50)
    p.add_argument("--T", type=parse_poly, default=None)
    p.add_argument("--R", type=parse_poly, default=None)
    p.add_argument("--weight", type=parse_poly, default=None)
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--p-list", type=parse_floats, default=[1.0, 2.0, 3.0])
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, tol=None)
    return ap


_VERIFY_DEFAULTS = {
    "interval": {"n": list(range(1, 11))},
    "arc-monotone": {"gamma_grid": [float(v) for v in np.linspace(0.3, 3.0, 10)]},
    "preimage-invariance": {"n": [1, 2, 3, 4], "T": np.array([-1.0, 0.0, 2.0]),
                            "weight": np.array([1.0, 0.3, 0.5]), "tol": 1e-7},
    "circle-powers": {"n": [0, 1, 2, 3]},
    "bounds": {"n": [1, 2, 3, 4, 5]},
}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    opts = {k: v for k, v in vars(ns).items() if k not in ("command", "m", "fmt", "output")}
    m = ns.m if ns.m is not None else _default_m()
    command = ns.command
    if command == "verify":
        suite = opts["suite"]
        command = f"verify {suite}"
        for k, v in _VERIFY_DEFAULTS[suite].items():
            if opts.get(k) is None:
                opts[k] = v
        if opts["tol"] is None:
            opts["tol"] = 1e-8
    if "n" in opts and opts["n"] is not None and any(n < 0 for n in opts["n"]):
        raise UsageError("degrees must be non-negative")
    return RunConfig(command, opts, m, ns.fmt, ns.output)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def render(cfg: RunConfig, table: Table) -> str:
    config = {"command": cfg.command, "m": cfg.m,
              **{k: _jsonable(v) for k, v in sorted(cfg.options.items()) if v is not None}}
    agree = all(r.get("agree_2m", True) for r in table.rows)
    if cfg.fmt == "json":
        doc = {"config": config, "rows": [_jsonable(r) for r in table.rows],
               "assertions": [_jsonable(a) for a in table.assertions]}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# widom {__version__}\n")
    buf.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
    buf.write(f"# m: {cfg.m}, 2m-agreement: {'all' if agree else 'partial'}\n")
    for a in table.assertions:
        buf.write(f"# assert {a['name']}: {'pass' if a['pass'] else 'FAIL'} "
                  f"(margin {_fmt(a['margin'])})\n")
    if table.rows:
        cols = list(table.rows[0].keys())
        for r in table.rows[1:]:
            cols += [k for k in r if k not in cols]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in table.rows:
            w.writerow([_fmt(r.get(c)) for c in cols])
    return buf.getvalue()


def run(cfg: RunConfig) -> int:
    if cfg.command.startswith("verify "):
        fn = VERIFY[cfg.command.split(" ", 1)[1]]
    else:
        fn = COMMANDS[cfg.command]
    table = fn(cfg)
    text = render(cfg, table)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not table.ok:
        for a in table.assertions:
            if not a["pass"]:
                print(f"assertion failed: {a['name']} (margin {_fmt(a['margin'])})",
                      file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return run(config_from_args(ns))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"widom: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"widom: non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except PostconditionError as exc:
        print(f"widom: assertion failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ValueError, TypeError) as exc:
        print(f"widom: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
