"""Closed forms for the equilibrium measure of a circular arc.

The arc K_gamma = {e^{i theta} : |theta - pi| <= gamma} is mapped by
x = z + 1/z onto L_gamma = [-2, c], c = -2 cos(gamma). Orthogonal polynomials
on L_gamma are rescaled Chebyshev polynomials, and the Verblunsky
coefficients of the arc follow from their ratios at x = 2.

Everything here is closed form except ``szego_check``, which compares the
formulas against quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from numpy.polynomial import chebyshev as cheb
from numpy.polynomial import polynomial as npoly

from .extremal import VerblunskySequence, orthogonal_monic
from .measures import CircularArc, DiscretizedMeasure, Interval, build_equilibrium

__all__ = [
    "ArcParams", "chebyshev_first_kind", "chebyshev_ratio", "arc_verblunsky_closed",
    "arc_widom_closed", "arc_widom_sequence", "arc_asymptotics", "limit_gap",
    "szego_check", "SzegoReport", "monotonicity_report", "MonotonicityReport",
]

BRANCH_TOL = 1e-12
STRICT_RTOL = 1e-12
# beyond this k*Theta the Chebyshev ratio is taken from the exponential form
RATIO_SWITCH = 30.0


@dataclass(frozen=True)
class ArcParams:
    gamma: float
    a: float = field(init=False)
    c: float = field(init=False)
    b: float = field(init=False)
    s: float = field(init=False)
    Theta: float = field(init=False)

    def __post_init__(self):
        g = float(self.gamma)
        if not 0.0 < g < math.pi:
            raise ValueError(f"gamma must lie in (0, pi), got {g!r}")
        half = g / 2.0
        a = math.sin(half) ** 2
        c = -2.0 * math.cos(g)
        # s - 1 = 2 cot^2(gamma/2); avoids cancellation in s - 1 for gamma near pi
        sm1 = 2.0 / math.tan(half) ** 2
        Theta = math.log1p(sm1 + math.sqrt(sm1 * (sm1 + 2.0)))
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", (c - 2.0) / 2.0)
        object.__setattr__(self, "s", 1.0 + sm1)
        object.__setattr__(self, "Theta", Theta)

    @property
    def cos_half(self) -> float:
        """tanh(Theta/2) = cos(gamma/2), the limit of |alpha_n|."""
        return math.cos(self.gamma / 2.0)

    @property
    def L(self) -> Interval:
        return Interval(-2.0, self.c)


def chebyshev_first_kind(k: int, s: float) -> float:
    """T_k(s) by the three-term recurrence."""
    if k < 0:
        raise ValueError("k must be non-negative")
    t0, t1 = 1.0, float(s)
    if k == 0:
        return t0
    for _ in range(k - 1):
        t0, t1 = t1, 2.0 * s * t1 - t0
    return t1


def chebyshev_ratio(params: ArcParams, count: int) -> np.ndarray:
    """r_k = T_{k+1}(s)/T_k(s) for k = 0..count-1.

    The ratio recurrence r_k = 2s - 1/r_{k-1} never overflows; once
    k*Theta is large the exponential form is exact to rounding.
    """
    s, Th = params.s, params.Theta
    r = np.empty(count)
    prev = None
    for k in range(count):
        if k * Th > RATIO_SWITCH:
            r[k] = math.exp(Th) * (1.0 + math.exp(-2.0 * (k + 1) * Th)) / (1.0 + math.exp(-2.0 * k * Th))
        elif k == 0:
            r[k] = s
        else:
            r[k] = 2.0 * s - 1.0 / prev
        prev = r[k]
    return r


def arc_verblunsky_closed(gamma: float, n: int) -> VerblunskySequence:
    """alpha_0..alpha_{n-1} for the arc equilibrium measure."""
    P = ArcParams(gamma)
    a, Th = P.a, P.Theta
    kmax = n // 2 + 2
    r = chebyshev_ratio(P, kmax + 1)
    th2 = math.tanh(Th / 2.0)
    alphas = np.empty(n)
    for j in range(n):
        k, odd = divmod(j, 2)
        if not odd:
            alphas[j] = -(r[k] - 1.0) / (r[k] + 1.0)
        else:
            alphas[j] = -th2 * math.tanh((k + 1) * Th)
            # same value through the Geronimus ratios u_{k+1} = a r_{k+1}, v = a
            other = 1.0 - 0.5 * (a * r[k + 1] + a)
            if abs(other - alphas[j]) > BRANCH_TOL:
                raise ArithmeticError(
                    f"alpha_{j} branches disagree: {alphas[j]!r} vs {other!r}")
    return VerblunskySequence(alphas, source="closed-form")


def limit_gap(gamma: float, n: int) -> np.ndarray:
    """cos(gamma/2) - |alpha_j| for j < n, with full relative accuracy.

    The naive difference underflows long before the gap does.
    """
    P = ArcParams(gamma)
    Th, ch = P.Theta, P.cos_half
    delta = np.empty(n)
    for j in range(n):
        k, odd = divmod(j, 2)
        if odd:
            delta[j] = ch * 2.0 / (math.exp(2.0 * (k + 1) * Th) + 1.0)
        else:
            q = math.exp(-2.0 * k * Th)
            r = math.exp(Th) - 2.0 * math.sinh(Th) * q / (1.0 + q)
            e_minus_r = 2.0 * math.sinh(Th) * q / (1.0 + q)
            delta[j] = 2.0 * e_minus_r / ((math.exp(Th) + 1.0) * (r + 1.0))
    return delta


def _log_factors(gamma: float, n: int) -> np.ndarray:
    """log((1 - alpha_j^2)/sin^2(gamma/2)) for j < n."""
    P = ArcParams(gamma)
    ch = P.cos_half
    delta = limit_gap(gamma, n)
    return np.log1p(delta * (2.0 * ch - delta) / P.a)


def arc_widom_sequence(gamma: float, n: int) -> np.ndarray:
    """[W_{2,j}]^2 for j = 1..n via the product formula."""
    return np.exp(np.cumsum(_log_factors(gamma, n)))


def arc_widom_closed(gamma: float, n: int) -> float:
    """[W_{2,n}]^2 = prod_{j<n} (1 - alpha_j^2) / sin(gamma/2)^{2n}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(math.exp(math.fsum(_log_factors(gamma, n))))


def arc_asymptotics(gamma: float) -> Tuple[float, float, float]:
    """(limit, inf, sup) of [W_{2,n}]^2 over n >= 1."""
    ch = ArcParams(gamma).cos_half
    limit = 1.0 + ch
    return limit, 1.0 + ch * ch, limit


# ---------------------------------------------------------------------------
# Szego map cross-check
# ---------------------------------------------------------------------------

@dataclass
class SzegoReport:
    gamma: float
    k_max: int
    rows: List[dict]
    failures: List[str]

    @property
    def ok(self) -> bool:
        return not self.failures


def _szego_image(mu: DiscretizedMeasure, params: ArcParams) -> DiscretizedMeasure:
    x = 2.0 * mu.nodes.real
    x = np.clip(x, -2.0, params.c)
    return DiscretizedMeasure(x, mu.weights.copy(), params.L, provenance="equilibrium")


def szego_check(gamma: float, k_max: int, m: int = 512) -> SzegoReport:
    """Compare orthogonal polynomials of the Szego image with Chebyshev forms
    and test the norm relations between the interval and the arc."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    P = ArcParams(gamma)
    a, b = P.a, P.b
    mu_arc = build_equilibrium(CircularArc(gamma), m)
    mu_L = _szego_image(mu_arc, P)
    alpha = arc_verblunsky_closed(gamma, 2 * k_max + 2).alphas.real

    phi_norm2 = [orthogonal_monic(mu_arc, j)[1] ** 2 for j in range(2 * k_max + 2)]
    rows, failures = [], []
    for k in range(1, k_max + 1):
        Pk, tk = orthogonal_monic(mu_L, k)
        # 2 a^k T_k((x - b)/(2a)); the domain [-2, c] is exactly b -+ 2a
        ref = cheb.Chebyshev.basis(k, domain=[b - 2 * a, b + 2 * a]).convert(
            kind=npoly.Polynomial).coef
        ref *= 2.0 * a ** k
        coef_err = float(np.max(np.abs(Pk.coefficients.real - ref)))
        norm2 = tk ** 2
        norm_err = abs(norm2 / (2.0 * a ** (2 * k)) - 1.0)
        # ||P_k||^2 = 2 (1 - alpha_{2k-1})^{-1} ||Phi_{2k}||^2
        even_rel = 2.0 / (1.0 - alpha[2 * k - 1]) * phi_norm2[2 * k]
        # ||P_k||^2 = 2 (1 + alpha_{2k-1}) ||Phi_{2k-1}||^2
        odd_rel = 2.0 * (1.0 + alpha[2 * k - 1]) * phi_norm2[2 * k - 1]
        even_err = abs(even_rel / norm2 - 1.0)
        odd_err = abs(odd_rel / norm2 - 1.0)
        rows.append({"k": k, "coef_err": coef_err, "norm2": norm2, "norm_err": norm_err,
                     "even_rel_err": even_err, "odd_rel_err": odd_err})
        if coef_err > 1e-9:
            failures.append(f"k={k}: coefficients off by {coef_err:.3g}")
        if norm_err > 1e-9:
            failures.append(f"k={k}: norm off by {norm_err:.3g}")
        if even_err > 1e-8:
            failures.append(f"k={k}: even norm relation off by {even_err:.3g}")
        if odd_err > 1e-8:
            failures.append(f"k={k}: odd norm relation off by {odd_err:.3g}")
    return SzegoReport(float(gamma), k_max, rows, failures)


# ---------------------------------------------------------------------------
# Monotonicity
# ---------------------------------------------------------------------------

@dataclass
class MonotonicityReport:
    gamma_grid: Tuple[float, ...]
    n_max: int
    # assertion name -> smallest margin seen (positive means strict)
    margins: dict
    failures: List[str]

    @property
    def ok(self) -> bool:
        return not self.failures


def monotonicity_report(gamma_grid: Sequence[float], n_max: int) -> MonotonicityReport:
    """Strictness checks on the closed forms.

    Margins in n are computed from the gap to the limit, which keeps full
    relative accuracy after the plain differences have underflowed.
    """
    grid = np.asarray(gamma_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("gamma_grid must be a nonempty 1-d sequence")
    if np.any(np.diff(grid) <= 0) or grid[0] <= 0 or grid[-1] >= math.pi:
        raise ValueError("gamma_grid must be strictly increasing inside (0, pi)")
    if n_max < 2:
        raise ValueError("n_max must be >= 2")

    margins = {name: math.inf for name in
               ("W_increasing_in_n", "alpha_negative", "alpha_subsequences_decreasing",
                "abs_alpha_decreasing_in_gamma", "W_decreasing_in_gamma",
                "abs_alpha_below_limit", "tanh_derivative_positive")}
    failures: List[str] = []

    def record(name, margin, where):
        margins[name] = min(margins[name], margin)
        if not margin > 0:
            failures.append(f"{name} fails at {where}: margin {margin:.3g}")

    absal = np.empty((grid.size, n_max + 1))
    logW = np.empty((grid.size, n_max))
    for i, g in enumerate(grid):
        P = ArcParams(g)
        alpha = arc_verblunsky_closed(g, n_max + 1).alphas.real
        delta = limit_gap(g, n_max + 1)
        absal[i] = -alpha
        logf = _log_factors(g, n_max)
        logW[i] = np.cumsum(logf)

        for j in range(n_max + 1):
            record("alpha_negative", -alpha[j], f"gamma={g:.6g}, n={j}")
            # relative form: delta carries its own relative accuracy
            record("abs_alpha_below_limit", delta[j], f"gamma={g:.6g}, n={j}")
        # W_{n+1}^2 / W_n^2 - 1 > 0  <=>  log factor j=n > 0, n >= 1
        for j in range(1, n_max):
            record("W_increasing_in_n", logf[j], f"gamma={g:.6g}, n={j}->{j + 1}")
        # alpha_{j+2} < alpha_j  <=>  delta_{j+2} < delta_j
        for j in range(n_max - 1):
            marg = (delta[j] - delta[j + 2]) / delta[j]
            record("alpha_subsequences_decreasing", marg - STRICT_RTOL,
                   f"gamma={g:.6g}, n={j}->{j + 2}")
        # -alpha_{2k+1} = tanh(Theta/2) tanh((k+1) Theta) grows with Theta
        h = 1e-5
        for k in range((n_max + 1) // 2):
            f = lambda th: math.tanh(th / 2.0) * math.tanh((k + 1) * th)
            record("tanh_derivative_positive", f(P.Theta + h) - f(P.Theta),
                   f"gamma={g:.6g}, k={k}")

    for i in range(grid.size - 1):
        g1, g2 = grid[i], grid[i + 1]
        d = absal[i] - absal[i + 1]
        for j in range(n_max + 1):
            record("abs_alpha_decreasing_in_gamma", d[j] - STRICT_RTOL * absal[i, j],
                   f"gamma={g1:.6g}->{g2:.6g}, n={j}")
        dW = logW[i] - logW[i + 1]
        for j in range(n_max):
            record("W_decreasing_in_gamma", dW[j] - STRICT_RTOL * max(1.0, abs(logW[i, j])),
                   f"gamma={g1:.6g}->{g2:.6g}, n={j + 1}")

    if grid.size == 1:
        # nothing to compare across gamma
        margins["abs_alpha_decreasing_in_gamma"] = math.inf
        margins["W_decreasing_in_gamma"] = math.inf
    return MonotonicityReport(tuple(float(g) for g in grid), n_max, margins, failures)
