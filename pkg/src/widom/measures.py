"""Discretized measures on intervals, circular arcs, the unit circle and
polynomial pre-images.

Every measure is stored as a finite list of complex nodes with positive
weights. Alongside the weights we keep, per node, the weight the
equilibrium measure of the support would carry there (``ref_weights``)
and the Radon-Nikodym derivative with respect to it (``density``). Atoms
carry a zero reference weight, so they never enter entropy integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

__all__ = [
    "Interval",
    "CircularArc",
    "UnitCircle",
    "PreimageReal",
    "PreimageCircle",
    "SupportDescriptor",
    "DiscretizedMeasure",
    "build_equilibrium",
    "apply_weight",
    "add_atoms",
    "moment",
    "MIN_NODES",
]

MIN_NODES = 8
ON_SUPPORT_TOL = 1e-10


def _as_coeffs(Q) -> np.ndarray:
    c = np.atleast_1d(np.asarray(Q, dtype=complex))
    c = np.trim_zeros(c, "b")
    if c.size < 2:
        raise ValueError("pre-image polynomial must have degree >= 1")
    return c


# --------------------------------------------------------------------------
# Support descriptors
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.a < self.b:
            raise ValueError(f"Interval needs a < b, got [{self.a}, {self.b}]")

    is_real = True
    is_circular = False

    def distance(self, z):
        z = np.asarray(z, dtype=complex)
        x = np.clip(z.real, self.a, self.b)
        return np.abs(z - x)


@dataclass(frozen=True)
class CircularArc:
    """The arc {e^{i theta}: |theta - pi| <= gamma}."""

    gamma: float

    def __post_init__(self):
        if not 0.0 < self.gamma < math.pi:
            raise ValueError(f"CircularArc needs 0 < gamma < pi, got {self.gamma}")

    is_real = False
    is_circular = True

    def distance(self, z):
        z = np.asarray(z, dtype=complex)
        theta = np.mod(np.angle(z), 2 * np.pi)
        lo, hi = math.pi - self.gamma, math.pi + self.gamma
        th = np.clip(theta, lo, hi)
        return np.abs(z - np.exp(1j * th))


@dataclass(frozen=True)
class UnitCircle:
    is_real = False
    is_circular = True

    def distance(self, z):
        return np.abs(np.abs(np.asarray(z, dtype=complex)) - 1.0)


@dataclass(frozen=True, eq=False)
class PreimageReal:
    """Q^{-1}([-1, 1]) for a real polynomial Q (coefficients constant first)."""

    Q: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = _as_coeffs(self.Q)
        if np.any(np.abs(c.imag) > 0):
            raise ValueError("PreimageReal needs a real polynomial")
        object.__setattr__(self, "Q", c.real.astype(float))

    base = Interval(-1.0, 1.0)
    is_real = True
    is_circular = False

    @property
    def degree(self) -> int:
        return len(self.Q) - 1

    @property
    def lead(self) -> float:
        return float(self.Q[-1])

    def __eq__(self, other):
        return isinstance(other, PreimageReal) and np.array_equal(self.Q, other.Q)

    def __hash__(self):
        return hash(("PreimageReal", tuple(self.Q)))

    def __repr__(self):
        return f"PreimageReal(Q={self.Q.tolist()})"

    def distance(self, z):
        z = np.asarray(z, dtype=complex)
        scale = np.abs(self.lead) * np.maximum(1.0, np.abs(z)) ** self.degree
        img = npoly.polyval(z, self.Q)
        return np.abs(z.imag) + self.base.distance(img) / scale


@dataclass(frozen=True, eq=False)
class PreimageCircle:
    """{z : |Q(z)| = 1} for a complex polynomial Q."""

    Q: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "Q", _as_coeffs(self.Q))

    base = UnitCircle()
    is_real = False
    is_circular = False

    @property
    def degree(self) -> int:
        return len(self.Q) - 1

    @property
    def lead(self) -> complex:
        return complex(self.Q[-1])

    def __eq__(self, other):
        return isinstance(other, PreimageCircle) and np.array_equal(self.Q, other.Q)

    def __hash__(self):
        return hash(("PreimageCircle", tuple(self.Q)))

    def __repr__(self):
        return f"PreimageCircle(Q={self.Q.tolist()})"

    def distance(self, z):
        z = np.asarray(z, dtype=complex)
        scale = np.abs(self.lead) * np.maximum(1.0, np.abs(z)) ** self.degree
        return self.base.distance(npoly.polyval(z, self.Q)) / scale


SupportDescriptor = Union[Interval, CircularArc, UnitCircle, PreimageReal, PreimageCircle]


# --------------------------------------------------------------------------
# Measures
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiscretizedMeasure:
    """Finite quadrature representation of a positive measure.

    ``density`` is the Radon-Nikodym derivative with respect to the
    equilibrium measure of ``support`` sampled at the nodes (``None`` when
    unknown); ``ref_weights`` are the equilibrium quadrature weights at the
    same nodes (zero at atoms).
    """

    nodes: np.ndarray
    weights: np.ndarray
    support: SupportDescriptor
    provenance: str = "custom"
    density: Optional[np.ndarray] = None
    ref_weights: Optional[np.ndarray] = None

    def __post_init__(self):
        nodes = np.ascontiguousarray(np.asarray(self.nodes, dtype=complex).ravel())
        weights = np.ascontiguousarray(np.asarray(self.weights, dtype=float).ravel())
        if nodes.shape != weights.shape:
            raise ValueError("nodes and weights must have the same length")
        if nodes.size == 0:
            raise ValueError("empty measure")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            bad = int(np.argmin(np.where(np.isfinite(weights), weights, -np.inf)))
            raise ValueError(f"non-positive weight {weights[bad]!r} at node {nodes[bad]!r}")
        dist = self.support.distance(nodes)
        if np.any(dist > ON_SUPPORT_TOL):
            bad = int(np.argmax(dist))
            raise ValueError(
                f"node {nodes[bad]!r} lies {dist[bad]:.3e} away from {self.support!r}")
        for name in ("density", "ref_weights"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=float).ravel()
                if arr.shape != weights.shape:
                    raise ValueError(f"{name} has the wrong length")
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if self.provenance == "equilibrium" and abs(self.mass - 1.0) > 1e-12:
            raise ValueError(f"equilibrium measure has mass {self.mass!r}")

    @property
    def mass(self) -> float:
        return math.fsum(self.weights)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def is_real(self) -> bool:
        return bool(self.support.is_real)

    def replace(self, **changes) -> "DiscretizedMeasure":
        kw = dict(nodes=self.nodes, weights=self.weights, support=self.support,
                  provenance=self.provenance, density=self.density,
                  ref_weights=self.ref_weights)
        kw.update(changes)
        return DiscretizedMeasure(**kw)

    def integrate(self, values) -> complex:
        return complex(np.dot(self.weights, np.asarray(values)))

    def __repr__(self):
        return (f"DiscretizedMeasure(size={self.size}, mass={self.mass:.15g}, "
                f"support={self.support!r}, provenance={self.provenance!r})")


def _midpoint_angles(m: int) -> np.ndarray:
    return (np.arange(m) + 0.5) * (np.pi / m)


def build_equilibrium(support: SupportDescriptor, m: int = 512, *,
                      circle_shift: float = 0.0) -> DiscretizedMeasure:
    """Equilibrium measure of ``support`` discretized with ``m`` base nodes.

    Intervals and arcs are parametrized so that the equilibrium measure
    becomes d(phi)/pi on (0, pi), which the midpoint rule integrates with
    equal weights. The unit circle uses m equispaced nodes, rotated by
    ``circle_shift`` grid steps. Pre-image supports are pulled back from
    the base equilibrium measure, giving ``deg Q * m`` nodes.
    """
    m = int(m)
    if m < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes, got {m}")

    if isinstance(support, Interval):
        phi = _midpoint_angles(m)
        mid, half = 0.5 * (support.a + support.b), 0.5 * (support.b - support.a)
        nodes = mid + half * np.cos(phi) + 0j
    elif isinstance(support, CircularArc):
        phi = _midpoint_angles(m)
        theta = 2.0 * np.arccos(math.sin(support.gamma / 2) * np.cos(phi))
        nodes = np.exp(1j * theta)
    elif isinstance(support, UnitCircle):
        nodes = np.exp(2j * np.pi * (np.arange(m) + circle_shift) / m)
    elif isinstance(support, (PreimageReal, PreimageCircle)):
        from .preimage import PullbackSpec, pullback

        base = build_equilibrium(support.base, m, circle_shift=circle_shift)
        spec = PullbackSpec.equilibrium(support.Q)
        return pullback(spec, base)
    else:
        raise TypeError(f"unsupported support {support!r}")

    weights = np.full(m, 1.0 / m)
    return DiscretizedMeasure(nodes, weights, support, "equilibrium",
                              density=np.ones(m), ref_weights=weights)


def _evaluate_weight(w, nodes: np.ndarray) -> np.ndarray:
    if callable(w):
        vals = np.asarray(w(nodes))
    else:
        vals = npoly.polyval(nodes, np.asarray(w))
    vals = np.broadcast_to(vals, nodes.shape)
    if np.iscomplexobj(vals):
        if np.any(np.abs(vals.imag) > 1e-12 * np.maximum(1.0, np.abs(vals.real))):
            bad = int(np.argmax(np.abs(vals.imag)))
            raise ValueError(f"weight is not real at node {nodes[bad]!r}: {vals[bad]!r}")
        vals = vals.real
    return np.asarray(vals, dtype=float)


def apply_weight(mu: DiscretizedMeasure,
                 w: Union[Callable, np.ndarray, list]) -> DiscretizedMeasure:
    """Multiply ``mu`` by a strictly positive weight.

    ``w`` is either a callable evaluated on the complex nodes or a list of
    polynomial coefficients (constant term first).
    """
    vals = _evaluate_weight(w, mu.nodes)
    if not np.all(vals > 0):
        bad = int(np.argmin(np.where(np.isnan(vals), -np.inf, vals)))
        raise ValueError(
            f"weight must be positive on the support; w({mu.nodes[bad]!r}) = {vals[bad]!r}")
    density = None if mu.density is None else mu.density * vals
    return mu.replace(weights=mu.weights * vals, density=density, provenance="weighted")


def add_atoms(mu: DiscretizedMeasure, points, masses) -> DiscretizedMeasure:
    """Append point masses. Atoms are null for the equilibrium measure."""
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    masses = np.atleast_1d(np.asarray(masses, dtype=float))
    if points.shape != masses.shape:
        raise ValueError("points and masses must have the same length")
    k = points.size
    ref = mu.ref_weights
    dens = mu.density
    return mu.replace(
        nodes=np.concatenate([mu.nodes, points]),
        weights=np.concatenate([mu.weights, masses]),
        provenance="with-atoms",
        ref_weights=None if ref is None else np.concatenate([ref, np.zeros(k)]),
        density=None if dens is None else np.concatenate([dens, np.zeros(k)]),
    )


def moment(mu: DiscretizedMeasure, k: int) -> complex:
    """k-th moment; trigonometric (conj(z)^k) on circle and arc supports."""
    z = mu.nodes
    if mu.support.is_circular:
        z = np.conj(z)
    if k < 0:
        z = 1.0 / z
        k = -k
    return complex(np.dot(mu.weights, z ** k))
