"""Polynomial pre-images: the pull-back U^{T,R}, lifting of extremal
polynomials, reflectionless measures on finite-gap sets and saturation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .extremal import MonicPoly, lp_extremal, lp_norm, orthogonal_monic
from .measures import (DiscretizedMeasure, Interval, PreimageCircle, PreimageReal,
                       UnitCircle, build_equilibrium)
from .potential import capacity
from .special import gamma_ratio

log = logging.getLogger(__name__)

__all__ = [
    "RootFindingError",
    "InvalidPullbackSpec",
    "PostconditionError",
    "PullbackSpec",
    "ValidationReport",
    "ReflectionlessSpec",
    "BandStructure",
    "SaturationReport",
    "polynomial_roots",
    "validate_spec",
    "pullback",
    "compose",
    "lift_extremal",
    "circle_power_extremal",
    "band_structure",
    "reflectionless_measure",
    "gamma_widom_value",
    "saturation_check",
]

ROOT_RESID_TOL = 1e-11
CLUSTER_TOL = 1e-8
IDENTITY_TOL = 1e-10
COMMON_ZERO_TOL = 1e-12
EDGE_SHIFT = 1e-6


class RootFindingError(RuntimeError):
    pass


class InvalidPullbackSpec(ValueError):
    def __init__(self, msg, point=None):
        super().__init__(msg if point is None else f"{msg} (at {point!r})")
        self.point = point


class PostconditionError(AssertionError):
    pass


def _coeffs(P) -> np.ndarray:
    if isinstance(P, MonicPoly):
        c = P.coefficients
    else:
        c = np.atleast_1d(np.asarray(P, dtype=complex))
    c = np.trim_zeros(c, "b")
    if c.size == 0:
        raise ValueError("zero polynomial")
    return c


def _real_if_real(c):
    c = np.asarray(c)
    return c.real.copy() if np.iscomplexobj(c) and np.all(c.imag == 0) else c


def _num(v) -> str:
    v = complex(v)
    return format(v.real if v.imag == 0 else v, ".15g")


def compose(outer, inner) -> np.ndarray:
    """Coefficients of outer(inner(z)), constant term first."""
    outer, inner = _coeffs(outer), _coeffs(inner)
    out = np.array([outer[-1]])
    for a in outer[-2::-1]:
        out = npoly.polyadd(npoly.polymul(out, inner), [a])
    return out


# --------------------------------------------------------------------------
# Roots
# --------------------------------------------------------------------------

def _horner2(a, y):
    """Value and derivative of the polynomial a (constant first) at y."""
    p = np.full_like(y, a[-1])
    dp = np.zeros_like(y)
    for c in a[-2::-1]:
        dp = dp * y + p
        p = p * y + c
    return p, dp


def _aberth(a: np.ndarray, targets: np.ndarray, maxiter: int = 200):
    """Roots of a(y) - t for every t in ``targets`` by Aberth-Ehrlich sweeps.

    Returns an array of shape (len(targets), deg a).
    """
    a = np.asarray(a, dtype=complex)
    N = a.size - 1
    lead = a[-1]
    t = np.asarray(targets, dtype=complex).ravel() / lead
    a = a / lead
    B = t.size
    if N == 1:
        return ((t - a[0]) / a[1])[:, None]
    norm_a = float(np.sum(np.abs(a)))

    center = -a[N - 1] / N
    c0, _ = _horner2(a, np.full(B, center))
    radius = np.abs(c0 - t) ** (1.0 / N)
    radius = np.where(radius > 0, radius, 1.0)
    k = np.arange(N)
    ang = 2 * np.pi * k / N + 0.4
    y = center + radius[:, None] * (1 + 0.05 * k / N) * np.exp(1j * ang)[None, :]

    def residual(y, t):
        p, dp = _horner2(a, y)
        p = p - t[:, None]
        scale = norm_a * np.maximum(1.0, np.abs(y)) ** N + np.abs(t)[:, None]
        return p, dp, scale

    active = np.ones(B, dtype=bool)
    stall = np.zeros(B, dtype=int)
    for it in range(maxiter):
        ya = y[active]
        p, dp, scale = residual(ya, t[active])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = ya[:, :, None] - ya[:, None, :]
            idx = np.arange(N)
            diff[:, idx, idx] = np.inf
            s = np.sum(1.0 / diff, axis=2)
            step = ratio / (1.0 - ratio * s)
        step = np.where(np.isfinite(step), step, 0.0)
        step = np.where(np.abs(p) <= 1e-3 * np.finfo(float).eps * scale, 0.0, step)
        ynew = ya - step
        small = np.all(np.abs(step) <= 4 * np.finfo(float).eps * np.maximum(np.abs(ynew), 1e-300), axis=1)
        ok = np.all(np.abs(p) <= ROOT_RESID_TOL * scale, axis=1)
        y[active] = ynew
        st = np.where(ok, stall[active] + 1, 0)
        stall[active] = st
        done = ok & (small | (st >= 20))
        idx_active = np.flatnonzero(active)
        active[idx_active[done]] = False
        if not active.any():
            break
    p, dp, scale = residual(y, t)
    bad = np.any(np.abs(p) > ROOT_RESID_TOL * scale, axis=1)
    if np.any(bad):
        j = int(np.flatnonzero(bad)[0])
        raise RootFindingError(
            f"Aberth iteration did not converge in {maxiter} sweeps for target {t[j] * lead!r}")
    return _cluster(a, t, y)


def _cluster(a, t, y):
    """Merge numerically coincident roots (multiple roots) into their mean."""
    N = y.shape[1]
    if N < 2:
        return y
    d = np.abs(y[:, :, None] - y[:, None, :])
    mag = np.maximum(1.0, np.abs(y))
    close = d < 1e-4 * mag[:, :, None]
    close[:, np.arange(N), np.arange(N)] = False
    rows = np.flatnonzero(close.any(axis=(1, 2)))
    norm_a = float(np.sum(np.abs(a)))
    for r in rows:
        yr = y[r].copy()
        used = np.zeros(N, dtype=bool)
        for i in range(N):
            if used[i]:
                continue
            grp = [i] + [j for j in range(i + 1, N) if not used[j] and close[r, i, j]]
            if len(grp) == 1:
                continue
            mean = yr[grp].mean()
            tight = np.max(np.abs(yr[grp] - mean)) < CLUSTER_TOL * max(1.0, abs(mean))
            pm = npoly.polyval(mean, a) - t[r]
            scale = norm_a * max(1.0, abs(mean)) ** N + abs(t[r])
            if tight or abs(pm) <= ROOT_RESID_TOL * scale:
                yr[grp] = mean
                used[grp] = True
        y[r] = yr
    return y


def polynomial_roots(P, target: complex = 0.0) -> np.ndarray:
    """All roots of P(y) - target, repeated according to multiplicity."""
    a = _coeffs(P)
    if a.size < 2:
        raise ValueError("polynomial must have degree >= 1")
    return _aberth(a, np.array([target]))[0]


# --------------------------------------------------------------------------
# Pull-back specification
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PullbackSpec:
    """Polynomials T (degree N) and R (degree N-1, same leading coefficient)."""

    T: np.ndarray
    R: np.ndarray
    validated: bool = False

    def __post_init__(self):
        T, R = _coeffs(self.T), _coeffs(self.R)
        object.__setattr__(self, "T", _real_if_real(T))
        object.__setattr__(self, "R", _real_if_real(R))
        if T.size < 2:
            raise InvalidPullbackSpec("T must have degree >= 1")
        if R.size != T.size - 1:
            raise InvalidPullbackSpec(
                f"deg R must be deg T - 1 = {T.size - 2}, got {R.size - 1}")
        if abs(R[-1] - T[-1]) > 1e-14 * abs(T[-1]):
            raise InvalidPullbackSpec(
                f"R must have the leading coefficient of T ({_num(T[-1])}), got {_num(R[-1])}")

    @classmethod
    def equilibrium(cls, T) -> "PullbackSpec":
        """The U^T case R = T'/N."""
        T = _coeffs(T)
        N = T.size - 1
        return cls(T, npoly.polyder(T) / N)

    @property
    def degree(self) -> int:
        return self.T.size - 1

    @property
    def tau(self):
        return self.T[-1]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.T) and not np.iscomplexobj(self.R)

    def branch_ratio(self):
        """R/T' with common zeros cancelled, as (numerator, denominator)."""
        num = np.asarray(self.R, dtype=complex)
        den = npoly.polyder(np.asarray(self.T, dtype=complex))
        if den.size > 1:
            for c in polynomial_roots(den):
                rs = npoly.polyval(abs(c), np.abs(num))
                if num.size > 1 and abs(npoly.polyval(c, num)) <= COMMON_ZERO_TOL * rs:
                    num = npoly.polydiv(num, [-c, 1.0])[0]
                    den = npoly.polydiv(den, [-c, 1.0])[0]
        return num, den


def _ratio_values(spec: PullbackSpec, y: np.ndarray) -> np.ndarray:
    num, den = spec.branch_ratio()
    with np.errstate(divide="ignore", invalid="ignore"):
        return npoly.polyval(y, num) / npoly.polyval(y, den)


def _check_ratios(A: np.ndarray, y: np.ndarray, targets: np.ndarray) -> Tuple[float, float]:
    """Enforce 0 < R/T' < inf at pre-images and the branch-sum identity."""
    mag = np.abs(A)
    not_real = np.abs(A.imag) > 1e-10 * np.maximum(mag, 1.0)
    bad = ~np.isfinite(A) | not_real | ~(A.real > 0)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise InvalidPullbackSpec(f"R/T' = {A[i, j]!r} is not positive", point=complex(y[i, j]))
    sums = A.sum(axis=1)
    err = np.abs(sums - 1.0)
    if np.any(err > IDENTITY_TOL):
        i = int(np.argmax(err))
        raise InvalidPullbackSpec(
            f"branch sum of R/T' is {sums[i]!r}, not 1", point=complex(targets[i]))
    return float(np.min(A.real)), float(np.max(err))


@dataclass(frozen=True)
class ValidationReport:
    spec: PullbackSpec
    n_samples: int
    min_ratio: float
    max_identity_error: float


def validate_spec(spec: PullbackSpec, K0_samples) -> ValidationReport:
    samples = np.atleast_1d(np.asarray(K0_samples, dtype=complex))
    y = _aberth(np.asarray(spec.T, dtype=complex), samples)
    A = _ratio_values(spec, y)
    min_ratio, err = _check_ratios(A, y, samples)
    return ValidationReport(replace(spec, validated=True), samples.size, min_ratio, err)


# --------------------------------------------------------------------------
# The pull-back itself
# --------------------------------------------------------------------------

def _target_support(spec: PullbackSpec, base):
    T = spec.T
    if isinstance(base, Interval):
        L = np.array([-(base.a + base.b) / (base.b - base.a), 2.0 / (base.b - base.a)])
        Q = compose(L, T)
        kind = "real"
    elif isinstance(base, UnitCircle):
        return PreimageCircle(T)
    elif isinstance(base, PreimageReal):
        Q = compose(base.Q, T)
        kind = "real"
    elif isinstance(base, PreimageCircle):
        return PreimageCircle(compose(base.Q, T))
    else:
        raise ValueError(f"cannot pull back a measure supported on {base!r}")
    if kind == "real":
        if np.any(np.abs(np.imag(Q)) > 0):
            raise ValueError("a real base set needs a real polynomial T")
        return PreimageReal(np.real(Q))


def pullback(spec: PullbackSpec, mu0: DiscretizedMeasure) -> DiscretizedMeasure:
    """The measure U^{T,R}(mu0) on T^{-1}(supp mu0).

    Each node z of mu0 with weight w is replaced by the N roots y of
    T(y) = z, carrying weights w * R(y)/T'(y).
    """
    support = _target_support(spec, mu0.support)
    N = spec.degree
    y = _aberth(np.asarray(spec.T, dtype=complex), mu0.nodes)
    if isinstance(support, PreimageReal):
        mag = np.maximum(1.0, np.abs(y))
        if np.any(np.abs(y.imag) > 1e-9 * mag):
            i, j = np.unravel_index(np.argmax(np.abs(y.imag) / mag), y.shape)
            raise ValueError(f"pre-image of {mu0.nodes[i]!r} is not real: {y[i, j]!r}")
        y = y.real + 0j
    A = _ratio_values(spec, y)
    _check_ratios(A, y, mu0.nodes)
    A = A.real

    weights = (mu0.weights[:, None] * A).ravel()
    ref = dens = None
    if mu0.ref_weights is not None:
        ref = np.repeat(mu0.ref_weights / N, N)
    if mu0.density is not None:
        dens = (N * A * mu0.density[:, None]).ravel()
    is_equilibrium_spec = np.allclose(spec.R, npoly.polyder(spec.T) / N, rtol=0, atol=1e-15 * np.max(np.abs(spec.T)))
    if mu0.provenance == "equilibrium" and is_equilibrium_spec:
        provenance = "equilibrium"
        weights = np.repeat(mu0.weights / N, N)
    else:
        provenance = "pullback"
    return DiscretizedMeasure(y.ravel(), weights, support, provenance,
                              density=dens, ref_weights=ref)


# --------------------------------------------------------------------------
# Extremal polynomials on pre-images
# --------------------------------------------------------------------------

def _rel_close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


def lift_extremal(spec: PullbackSpec, Tn: MonicPoly, p: float,
                  mu0: Optional[DiscretizedMeasure] = None) -> MonicPoly:
    """tau^{-n} Tn(T(z)), monic of degree n*N.

    With ``mu0`` the norm relation against the pulled-back measure and the
    Widom invariance are checked; a violation raises PostconditionError.
    """
    n, N = Tn.degree, spec.degree
    S = compose(Tn.coefficients, spec.T) / spec.tau ** n
    if S.size != n * N + 1:
        raise ValueError("composition degree mismatch")
    S = MonicPoly(S)
    if mu0 is not None:
        mu = pullback(spec, mu0)
        lhs = lp_norm(mu, S, p)
        base = lp_norm(mu0, Tn, p)
        rhs = abs(spec.tau) ** (-n) * base
        if not _rel_close(lhs, rhs, 1e-10):
            raise PostconditionError(f"lifted norm {lhs!r} != |tau|^-n * base norm {rhs!r}")
        W = lhs / capacity(mu.support).cap ** (n * N)
        W0 = base / capacity(mu0.support).cap ** n
        if not _rel_close(W, W0, 1e-8):
            raise PostconditionError(f"Widom factors differ: {W!r} vs {W0!r}")
    return S


def circle_power_extremal(Tn: MonicPoly, ell: int, N: int, mu: DiscretizedMeasure,
                          p: float, mu0: Optional[DiscretizedMeasure] = None) -> MonicPoly:
    """z^ell * Tn(z^N) for the pull-back of a circle measure under z^N."""
    if not 0 <= ell < N:
        raise ValueError(f"ell must lie in 0..{N - 1}, got {ell}")
    n = Tn.degree
    zN = np.zeros(N + 1)
    zN[-1] = 1.0
    core = compose(Tn.coefficients, zN) if n > 0 else np.array([1.0 + 0j])
    S = MonicPoly(np.concatenate([np.zeros(ell), core]))
    S0 = MonicPoly(core)
    norm_S = lp_norm(mu, S, p)
    norm_0 = lp_norm(mu, S0, p)
    if not _rel_close(norm_S, norm_0, 1e-8):
        raise PostconditionError(f"||S_(l+nN)|| = {norm_S!r} but ||S_(nN)|| = {norm_0!r}")
    if mu0 is not None:
        cap = capacity(mu.support).cap
        W = norm_S / cap ** (ell + n * N)
        W0 = lp_norm(mu0, Tn, p) / capacity(mu0.support).cap ** n
        if not _rel_close(W, cap ** (-ell) * W0, 1e-8):
            raise PostconditionError(f"Widom relation fails: {W!r} vs {cap ** (-ell) * W0!r}")
    return S


# --------------------------------------------------------------------------
# Finite-gap pre-images of [-1, 1] and reflectionless measures
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BandStructure:
    bands: Tuple[Tuple[float, float], ...]
    gaps: Tuple[Tuple[float, float], ...]
    critical: Tuple[float, ...]       # zeros of T' inside the gaps


def _real_roots(c, target):
    r = polynomial_roots(c, target)
    mag = np.maximum(1.0, np.abs(r))
    if np.any(np.abs(r.imag) > 1e-7 * mag):
        raise ValueError("T^{-1}([-1, 1]) is not contained in the real line")
    return np.sort(r.real)


def band_structure(T) -> BandStructure:
    """Bands and gaps of T^{-1}([-1, 1]) for a real polynomial T."""
    T = _coeffs(T)
    if np.any(T.imag != 0):
        raise ValueError("band structure needs a real polynomial")
    T = T.real
    pts = np.sort(np.concatenate([_real_roots(T, 1.0), _real_roots(T, -1.0)]))
    bands: List[List[float]] = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi - lo <= 1e-12 * max(1.0, abs(lo)):
            continue
        if abs(npoly.polyval(0.5 * (lo + hi), T)) <= 1.0:
            if bands and abs(bands[-1][1] - lo) <= 1e-7 * max(1.0, abs(lo)):
                bands[-1][1] = hi
            else:
                bands.append([lo, hi])
    gaps = tuple((bands[k][1], bands[k + 1][0]) for k in range(len(bands) - 1))
    dT = npoly.polyder(T)
    crit = []
    if dT.size > 1:
        cr = polynomial_roots(dT).real
        for lo, hi in gaps:
            inside = cr[(cr > lo) & (cr < hi)]
            if inside.size != 1:
                raise ValueError(f"gap ({lo}, {hi}) holds {inside.size} critical points")
            crit.append(float(inside[0]))
    return BandStructure(tuple(tuple(b) for b in bands), gaps, tuple(crit))


@dataclass(frozen=True, eq=False)
class ReflectionlessSpec:
    T: np.ndarray
    d_points: Tuple[float, ...]
    structure: BandStructure = field(init=False)

    def __post_init__(self):
        T = _coeffs(self.T)
        if np.any(T.imag != 0):
            raise ValueError("reflectionless measures need a real polynomial T")
        object.__setattr__(self, "T", T.real)
        st = band_structure(T.real)
        object.__setattr__(self, "structure", st)
        d = tuple(float(x) for x in self.d_points)
        object.__setattr__(self, "d_points", d)
        if len(d) != len(st.gaps):
            raise ValueError(f"need {len(st.gaps)} gap points, got {len(d)}")
        for dk, (lo, hi) in zip(d, st.gaps):
            slack = 1e-12 * max(1.0, abs(lo), abs(hi))
            if not lo - slack <= dk <= hi + slack:
                raise ValueError(f"d = {dk} lies outside its gap [{lo}, {hi}]")

    @property
    def c_points(self) -> Tuple[float, ...]:
        return self.structure.critical


def reflectionless_measure(spec: ReflectionlessSpec, m: int = 512) -> DiscretizedMeasure:
    """prod |x - d_k|/|x - c_k| times the equilibrium measure of T^{-1}([-1, 1]).

    Gap points on a gap edge are moved inside by 1e-6 of the gap length;
    the substitution is recorded in the provenance tag.
    """
    T = spec.T
    N = T.size - 1
    R = npoly.polyder(T) / N
    notes = []
    for k, (dk, ck, (lo, hi)) in enumerate(zip(spec.d_points, spec.c_points,
                                              spec.structure.gaps)):
        shift = EDGE_SHIFT * (hi - lo)
        if dk <= lo:
            new = lo + shift
        elif dk >= hi:
            new = hi - shift
        else:
            new = dk
        if new != dk:
            notes.append(f"d{k + 1}:{float(dk):.15g}->{float(new):.15g}")
            log.info("gap point d%d = %r on a gap edge, using %r", k + 1, dk, new)
        if new != ck:
            R = npoly.polydiv(R, [-ck, 1.0])[0]
            R = npoly.polymul(R, [-new, 1.0])
    R[-1] = T[-1]
    pspec = PullbackSpec(T, R)
    mu = pullback(pspec, build_equilibrium(Interval(-1.0, 1.0), m))
    tag = "reflectionless" + (f"[{', '.join(notes)}]" if notes else "")
    return mu.replace(provenance=tag)


# --------------------------------------------------------------------------
# Closed-form Widom value and saturation
# --------------------------------------------------------------------------

def gamma_widom_value(p: float) -> float:
    """2^p / sqrt(pi) * Gamma((p+1)/2) / Gamma(p/2 + 1)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return 2.0 ** p / math.sqrt(math.pi) * gamma_ratio((p + 1) / 2.0, p / 2.0 + 1.0)


@dataclass
class SaturationReport:
    variant: str
    degree: int
    rows: List[dict]
    ok: bool


def saturation_check(Q, variant: str = "real-interval", p: float = 2.0,
                     k_multiples: Sequence[int] = (1,), m: int = 512,
                     tol: float = 1e-8) -> SaturationReport:
    Qc = _coeffs(Q)
    N = Qc.size - 1
    rows = []
    if variant == "real-interval":
        if np.any(Qc.imag != 0):
            raise ValueError("real variant needs a real polynomial")
        mu = build_equilibrium(PreimageReal(Qc.real), m)
        _, t = orthogonal_monic(mu, N)
        W = t / capacity(mu.support).cap ** N
        rows.append({"n": N, "p": 2.0, "W": W, "expected": math.sqrt(2.0),
                     "pass": _rel_close(W, math.sqrt(2.0), tol)})
    elif variant == "circle":
        mu = build_equilibrium(PreimageCircle(Qc), m)
        cap = capacity(mu.support).cap
        for k in k_multiples:
            _, t = lp_extremal(mu, p, k * N)
            W = t / cap ** (k * N)
            rows.append({"n": k * N, "p": float(p), "W": W, "expected": 1.0,
                         "pass": abs(W - 1.0) <= tol})
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return SaturationReport(variant, N, rows, all(r["pass"] for r in rows))
