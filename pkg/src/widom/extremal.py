"""Monic L_p(mu) extremal polynomials, Verblunsky coefficients and Widom factors."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .measures import (DiscretizedMeasure, Interval, apply_weight,
                       build_equilibrium)
from .potential import UnknownDensityError, capacity, relative_entropy

log = logging.getLogger(__name__)

__all__ = [
    "MonicPoly",
    "VerblunskySequence",
    "WidomRecord",
    "ConvergenceError",
    "orthonormal_basis",
    "orthogonal_monic",
    "verblunsky_from_measure",
    "lp_extremal",
    "lp_norm",
    "extremality_residual",
    "widom_record",
    "sharpness_experiment",
    "SharpnessCell",
    "weak_star_probe",
]

LB_TOL = 1e-8
IRLS_RTOL = 1e-13
IRLS_MAXITER = 500
STEP_RTOL = 1e-10
FLAT_RUN = 20


class ConvergenceError(RuntimeError):
    """IRLS did not reach its stopping criterion; carries the last iterate."""

    def __init__(self, msg, poly=None, t=None, residual=None):
        super().__init__(msg)
        self.poly = poly
        self.t = t
        self.residual = residual


@dataclass(frozen=True, eq=False)
class MonicPoly:
    """Monic polynomial, coefficients stored constant term first."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex).ravel()
        if c.size == 0:
            raise ValueError("empty coefficient list")
        if c[-1] != 1:
            if abs(c[-1] - 1) > 1e-12:
                raise ValueError(f"leading coefficient {c[-1]!r} is not 1")
            c[-1] = 1.0
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def from_roots(cls, roots) -> "MonicPoly":
        return cls(npoly.polyfromroots(np.asarray(roots, dtype=complex)))

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def __call__(self, z):
        return npoly.polyval(np.asarray(z, dtype=complex), self.coefficients)

    def values_on(self, mu: DiscretizedMeasure) -> np.ndarray:
        return self(mu.nodes)

    def real_if_close(self, tol=1e-12) -> np.ndarray:
        c = self.coefficients
        scale = max(1.0, float(np.max(np.abs(c))))
        return c.real if np.all(np.abs(c.imag) <= tol * scale) else c

    def allclose(self, other, atol=1e-10) -> bool:
        o = other.coefficients if isinstance(other, MonicPoly) else np.asarray(other)
        return o.size == self.coefficients.size and np.allclose(
            self.coefficients, o, rtol=0, atol=atol)

    def __repr__(self):
        return f"MonicPoly({np.round(self.real_if_close(), 12).tolist()})"


@dataclass(frozen=True)
class VerblunskySequence:
    alphas: np.ndarray
    source: str

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=complex)
        if np.any(np.abs(a) >= 1):
            raise ValueError("Verblunsky coefficients must lie in the open unit disk")
        a.setflags(write=False)
        object.__setattr__(self, "alphas", a)

    def __len__(self):
        return self.alphas.size

    def __getitem__(self, k):
        return self.alphas[k]


@dataclass(frozen=True)
class WidomRecord:
    p: float
    n: int
    t: float
    capn: float
    W: float
    S: Optional[float]
    ratio: Optional[float]
    lower_bound_ok: Optional[bool]
    improved_bound_ok: Optional[bool] = None
    poly: Optional[MonicPoly] = field(default=None, repr=False, compare=False)

    def as_row(self) -> dict:
        return {"p": self.p, "n": self.n, "t": self.t, "capn": self.capn, "W": self.W,
                "Wp": self.W ** self.p, "S": self.S, "ratio": self.ratio,
                "lower_bound_ok": self.lower_bound_ok,
                "improved_bound_ok": self.improved_bound_ok}


# --------------------------------------------------------------------------
# p = 2: orthogonalization
# --------------------------------------------------------------------------

def _maybe_real(mu: DiscretizedMeasure):
    z = mu.nodes
    if np.all(z.imag == 0):
        return z.real
    return z


def orthonormal_basis(mu: DiscretizedMeasure, n: int):
    """Orthonormal polynomials q_0..q_n in L_2(mu).

    Gram-Schmidt over the Krylov sequence 1, z, z^2, ... where each new
    vector is z times the previous orthonormal one, with a second full
    orthogonalization pass. Returns (values, coeffs, norms): values[:, k]
    holds q_k at the nodes, coeffs[k] its monomial coefficients and
    norms[k] the L_2 norm of the monic orthogonal polynomial of degree k.
    """
    z = _maybe_real(mu)
    if n < 0:
        raise ValueError("degree must be nonnegative")
    distinct = np.unique(np.round(mu.nodes, 14)).size
    if n >= distinct:
        raise ValueError(f"degree {n} needs more than {distinct} distinct nodes")
    w = mu.weights
    sw = np.sqrt(w)
    dtype = z.dtype
    V = np.zeros((z.size, n + 1), dtype=dtype)  # sqrt(w) * q_k(nodes)
    C = np.zeros((n + 1, n + 1), dtype=dtype)
    norms = np.empty(n + 1)
    norms[0] = math.sqrt(math.fsum(w))
    V[:, 0] = sw / norms[0]
    C[0, 0] = 1.0 / norms[0]
    for k in range(n):
        v = z * V[:, k]
        c = np.zeros(n + 1, dtype=dtype)
        c[1:] = C[k, :-1]
        for _ in range(2):
            h = V[:, :k + 1].conj().T @ v
            v = v - V[:, :k + 1] @ h
            c = c - h @ C[:k + 1]
        beta = np.linalg.norm(v)
        if not beta > 1e-14 * np.linalg.norm(z * V[:, k]):
            raise np.linalg.LinAlgError(f"Gram-Schmidt breakdown at degree {k + 1}")
        V[:, k + 1] = v / beta
        C[k + 1] = c / beta
        norms[k + 1] = norms[k] * beta
    with np.errstate(divide="ignore", invalid="ignore"):
        Q = V / sw[:, None]
    return Q, C, norms


def orthogonal_monic(mu: DiscretizedMeasure, n: int) -> Tuple[MonicPoly, float]:
    """Monic orthogonal polynomial of degree n and its L_2(mu) norm t_{2,n}."""
    Q, C, norms = orthonormal_basis(mu, n)
    coeffs = C[n] * norms[n]
    coeffs[-1] = 1.0
    return MonicPoly(coeffs), float(norms[n])


def verblunsky_from_measure(mu: DiscretizedMeasure, count: int) -> VerblunskySequence:
    """alpha_k = -conj(Phi_{k+1}(0)) for k < count."""
    if not mu.support.is_circular:
        raise ValueError("Verblunsky coefficients need a measure on the unit circle or an arc")
    Q, C, norms = orthonormal_basis(mu, count)
    alphas = -np.conj(C[1:, 0] * norms[1:])
    return VerblunskySequence(alphas, "from-measure")


# --------------------------------------------------------------------------
# General p: IRLS
# --------------------------------------------------------------------------

def lp_norm(mu: DiscretizedMeasure, P, p: float) -> float:
    vals = np.abs(P(mu.nodes) if callable(P) else np.asarray(P))
    return math.fsum(mu.weights * vals ** p) ** (1.0 / p)


def _check_p(p):
    if not (isinstance(p, (int, float)) and math.isfinite(p)):
        raise ValueError(f"p must be finite, got {p!r}; p = inf is out of scope")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p!r}; p < 1 is non-convex and out of scope")


def _l1_coefficients(w, base, B):
    """Exact minimizer of sum w |base + B b| over real b, by linear programming.

    The dual max sum w base lam, |lam| <= 1, B^T (w lam) = 0 is small and
    well conditioned; b is read off its equality multipliers.
    """
    from scipy.optimize import linprog

    n = B.shape[1]
    # weights are O(1/m); rescale so solver tolerances are relative ones
    c = w * base
    A = (B * w[:, None]).T
    sc = float(np.max(np.abs(c)))
    sa = np.max(np.abs(A), axis=1)
    res = linprog(c=c / sc, A_eq=A / sa[:, None], b_eq=np.zeros(n),
                  bounds=(-1.0, 1.0), method="highs")
    if res.status != 0:
        raise ConvergenceError(f"L1 linear program failed: {res.message}")
    dual = -res.fun * sc
    # the multipliers are only accurate to solver tolerance; an optimal vertex
    # interpolates zero at n nodes, so snap to the n nodes where |P| is smallest
    y = np.asarray(res.eqlin.marginals, dtype=float) * sc / sa
    best = None
    for b0 in (y, -y):
        near = np.argsort(np.abs(base + B @ b0))[:n]
        b1 = np.linalg.solve(B[near], -base[near])
        for b in (b0, b1):
            f = math.fsum(w * np.abs(base + B @ b))
            if best is None or f < best[1]:
                best = (b, f)
    b, f = best
    if abs(f - dual) > 1e-9 * max(abs(dual), 1e-300):
        raise ConvergenceError(f"L1 duality gap {abs(f - dual):.3e}", t=f)
    return b, f


def lp_extremal(mu: DiscretizedMeasure, p: float, n: int, *,
                maxiter: int = IRLS_MAXITER, rtol: float = IRLS_RTOL,
                history: Optional[list] = None) -> Tuple[MonicPoly, float]:
    """Monic polynomial of degree n minimizing the L_p(mu) norm, and the norm.

    The objective sum w_i |P(z_i)|^p is minimized over the lower
    coefficients by iteratively reweighted least squares in the orthonormal
    basis of mu. Each step solves the weighted L2 problem with weights
    w_i max(|P_i|, floor)^(p-2); the step length is chosen among the full
    step and the Newton-scaled step 1/(p-1), halving until the objective
    does not increase. For p = 1 on real nodes the discrete problem is a
    linear program and is solved as one.
    """
    _check_p(p)
    if p == 2:
        P, t = orthogonal_monic(mu, n)
        if history is not None:
            history.append(t ** 2)
        return P, t
    if n == 0:
        P = MonicPoly([1.0])
        return P, mu.mass ** (1.0 / p)

    Q, C, norms = orthonormal_basis(mu, n)
    w = mu.weights
    base = Q[:, n] * norms[n]          # monic orthogonal polynomial on nodes
    B = Q[:, :n]
    if p == 1 and not np.iscomplexobj(Q):
        b, f = _l1_coefficients(w, base, B)
        if history is not None:
            history.append(f)
        coeffs = C[n] * norms[n] + b @ C[:n]
        coeffs[-1] = 1.0
        return MonicPoly(coeffs), f
    floor = 1e-12 * float(np.max(np.abs(mu.nodes))) ** n
    b = np.zeros(n, dtype=Q.dtype)

    def objective(vals):
        return math.fsum(w * np.abs(vals) ** p)

    vals = base.copy()
    f = objective(vals)
    hist = [f]
    steps = [1.0 / (p - 1), 1.0] if p > 1 else [1.0]
    converged = False
    flat = 0
    for it in range(maxiter):
        v = w * np.maximum(np.abs(vals), floor) ** (p - 2)
        sv = np.sqrt(v)
        target, *_ = np.linalg.lstsq(sv[:, None] * B, -sv * base, rcond=None)
        d = target - b
        best = None
        for theta in steps:
            cand = vals + theta * (B @ d)
            fc = objective(cand)
            if best is None or fc < best[0]:
                best = (fc, theta, cand)
        theta = min(steps)
        while best[0] > f and theta > 1e-6:
            theta *= 0.5
            cand = vals + theta * (B @ d)
            fc = objective(cand)
            if fc < best[0]:
                best = (fc, theta, cand)
        if best[0] > f:
            # no step lowers the objective any more: rounding level reached
            converged = True
            break
        f_new, theta, vals_new = best
        assert f_new <= f, "IRLS objective increased"
        step = theta * d
        b = b + step
        vals = vals_new
        decrease = (f - f_new) / f if f > 0 else 0.0
        f = f_new
        hist.append(f)
        # the decrease is quadratic in the gradient, so also ask for a small step;
        # at a kink of the discrete problem (p near 1, a zero on a node) the
        # step need not shrink, and a long flat run is accepted instead
        flat = flat + 1 if decrease < rtol else 0
        if flat and (np.linalg.norm(step) <= STEP_RTOL * (1.0 + np.linalg.norm(b))
                     or flat >= FLAT_RUN):
            converged = True
            break
    if history is not None:
        history.extend(hist)

    coeffs = C[n] * norms[n] + b @ C[:n]
    coeffs[-1] = 1.0
    P = MonicPoly(coeffs)
    t = f ** (1.0 / p)
    if not converged:
        res = extremality_residual(mu, p, P)
        raise ConvergenceError(
            f"IRLS did not converge in {maxiter} iterations (p={p}, n={n}, residual={res:.3e})",
            poly=P, t=t, residual=res)
    return P, t


def extremality_residual(mu: DiscretizedMeasure, p: float, P: MonicPoly) -> float:
    """max_k |sum w z^k |P|^(p-2) conj(P)| / sum w |P|^(p-1) for k < deg P."""
    _check_p(p)
    vals = P(mu.nodes)
    a = np.abs(vals)
    with np.errstate(divide="ignore", invalid="ignore"):
        phase = np.where(a > 0, np.conj(vals) / a, 0.0)
    g = mu.weights * a ** (p - 1) * phase
    denom = float(np.dot(mu.weights, a ** (p - 1)))
    if P.degree == 0:
        return 0.0
    zk = np.vander(mu.nodes, P.degree, increasing=True)
    return float(np.max(np.abs(g @ zk)) / denom)


# --------------------------------------------------------------------------
# Widom records
# --------------------------------------------------------------------------

def _is_real_equilibrium(mu: DiscretizedMeasure) -> bool:
    return mu.support.is_real and mu.provenance == "equilibrium"


def widom_record(mu: DiscretizedMeasure, p: float, n: int, *,
                 cap: Optional[float] = None, **irls) -> WidomRecord:
    P, t = lp_extremal(mu, p, n, **irls)
    if cap is None:
        cap = capacity(mu.support).cap
    capn = cap ** n
    W = t / capn
    try:
        S = relative_entropy(mu)
    except UnknownDensityError:
        S = None
    if S is None:
        ratio = ok = None
    else:
        ratio = W ** p / S if S > 0 else math.inf
        ok = ratio >= 1 - LB_TOL
    improved = None
    if p == 2 and _is_real_equilibrium(mu):
        improved = W ** 2 >= 2 - LB_TOL
    return WidomRecord(p=float(p), n=int(n), t=t, capn=capn, W=W, S=S, ratio=ratio,
                       lower_bound_ok=ok, improved_bound_ok=improved, poly=P)


# --------------------------------------------------------------------------
# Sharpness of the universal lower bound
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SharpnessCell:
    eps: float
    degree: Optional[int]        # None for the exact weight w_eps itself
    ratio: float
    W: float
    S: float
    clipped: bool = False
    flagged: bool = False
    lower_bound_ok: bool = True


def _chebyshev_approximant(f: Callable, a: float, b: float, degree: int):
    """Chebyshev interpolant of f on [a, b] at degree+1 first-kind points."""
    from scipy.fft import dct

    M = degree + 1
    theta = (np.arange(M) + 0.5) * np.pi / M
    x = 0.5 * (a + b) + 0.5 * (b - a) * np.cos(theta)
    c = dct(f(x), type=2) / M
    c[0] *= 0.5

    def approx(z):
        t = (2.0 * np.real(z) - (a + b)) / (b - a)
        return np.polynomial.chebyshev.chebval(t, c)

    return approx


def _real_hull(support) -> Tuple[float, float]:
    if isinstance(support, Interval):
        return support.a, support.b
    raise ValueError("sharpness experiment needs an Interval support")


def sharpness_experiment(K, p: float, n: int, eps_grid: Sequence[float],
                         approx_degrees: Sequence[int], m: int = 512) -> List[SharpnessCell]:
    """Ratios [W_{p,n}]^p / S for w_eps = (x^2 + eps^2)^(-np/2) and approximants.

    Polynomial approximants are Chebyshev interpolants of w_eps; where an
    approximant drops below half of min w_eps it is clipped there and the
    cell is flagged.
    """
    a, b = _real_hull(K)
    if not a <= 0 <= b:
        raise ValueError("K must contain 0")
    if any(not 0 < e <= 1 for e in eps_grid):
        raise ValueError("eps values must lie in (0, 1]")
    if list(approx_degrees) != sorted(approx_degrees):
        raise ValueError("approximation degrees must be ascending")
    muK = build_equilibrium(K, m)
    x = muK.nodes.real
    cells = []
    for eps in eps_grid:
        def w_eps(z, eps=eps):
            return (np.real(z) ** 2 + eps ** 2) ** (-n * p / 2.0)

        rec = widom_record(apply_weight(muK, w_eps), p, n)
        cells.append(SharpnessCell(eps, None, rec.ratio, rec.W, rec.S,
                                   lower_bound_ok=bool(rec.lower_bound_ok)))
        w_min = min(w_eps(np.array([a, b])).min(), float(w_eps(x).min()))
        for d in approx_degrees:
            approx = _chebyshev_approximant(w_eps, a, b, d)
            vals = approx(x)
            clipped = bool(np.any(vals < 0.5 * w_min))
            flagged = bool(np.any(vals <= 0))
            vals = np.maximum(vals, 0.5 * w_min)
            rec = widom_record(apply_weight(muK, lambda z, v=vals: v), p, n)
            cells.append(SharpnessCell(eps, int(d), rec.ratio, rec.W, rec.S,
                                       clipped=clipped, flagged=flagged,
                                       lower_bound_ok=bool(rec.lower_bound_ok)))
    return cells


# --------------------------------------------------------------------------
# Continuity in the measure
# --------------------------------------------------------------------------

def weak_star_probe(mu: DiscretizedMeasure, delta: float, p: float, n: int,
                    seed: int = 0) -> Tuple[float, float]:
    """Deviations (|dt|, |dW|) after scaling weights by 1 + delta * r_i.

    r_i is uniform on [-1, 1], drawn from a generator seeded with ``seed``.
    """
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    cap = capacity(mu.support).cap
    _, t = lp_extremal(mu, p, n)
    if delta == 0:
        return 0.0, 0.0
    r = np.random.default_rng(seed).uniform(-1.0, 1.0, mu.size)
    factor = 1.0 + delta * r
    dens = None if mu.density is None else mu.density * factor
    pert = mu.replace(weights=mu.weights * factor, density=dens, provenance="perturbed")
    _, tp = lp_extremal(pert, p, n)
    return abs(tp - t), abs(tp - t) / cap ** n
