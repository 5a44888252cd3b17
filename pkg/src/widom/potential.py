"""Logarithmic capacity of the supported sets and exponential relative entropy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .measures import (CircularArc, DiscretizedMeasure, Interval, PreimageCircle,
                       PreimageReal, UnitCircle, _evaluate_weight)

__all__ = ["CapacityResult", "capacity", "relative_entropy", "UnknownDensityError"]


class UnknownDensityError(ValueError):
    """The Radon-Nikodym derivative with respect to the equilibrium measure is unknown."""


@dataclass(frozen=True)
class CapacityResult:
    cap: float
    method: str

    def __float__(self):
        return self.cap


def capacity(support) -> CapacityResult:
    if isinstance(support, Interval):
        return CapacityResult((support.b - support.a) / 4.0, "closed-form")
    if isinstance(support, CircularArc):
        return CapacityResult(math.sin(support.gamma / 2.0), "closed-form")
    if isinstance(support, UnitCircle):
        return CapacityResult(1.0, "closed-form")
    if isinstance(support, (PreimageReal, PreimageCircle)):
        base = capacity(support.base).cap
        cap = (base / abs(support.lead)) ** (1.0 / support.degree)
        return CapacityResult(cap, "preimage-relation")
    raise TypeError(f"no capacity formula for {support!r}")


def relative_entropy(mu: DiscretizedMeasure,
                     muK: Optional[DiscretizedMeasure] = None,
                     weight: Optional[Callable] = None) -> float:
    """exp of the integral of log w against the equilibrium measure.

    The derivative w is taken from ``weight`` when given, otherwise from the
    density carried by ``mu``; failing both, from ``mu.weights / muK.weights``
    when the two measures share their nodes. Returns 0 when w vanishes at a
    node of positive equilibrium weight.
    """
    if weight is not None:
        base = muK if muK is not None else mu
        ref = base.weights if muK is not None else base.ref_weights
        if ref is None:
            raise UnknownDensityError("equilibrium weights unknown; pass muK")
        w = _evaluate_weight(weight, base.nodes)
    elif mu.density is not None and mu.ref_weights is not None:
        w, ref = mu.density, mu.ref_weights
    elif muK is not None and mu.size == muK.size and np.array_equal(mu.nodes, muK.nodes):
        w, ref = mu.weights / muK.weights, muK.weights
    else:
        raise UnknownDensityError(
            "measure does not carry its Radon-Nikodym derivative and no weight was given")

    active = ref > 0
    w, ref = np.asarray(w, dtype=float)[active], ref[active]
    if np.any(w < 0):
        raise ValueError("negative Radon-Nikodym derivative")
    if np.any(w == 0):
        return 0.0
    return math.exp(math.fsum(ref * np.log(w)) / math.fsum(ref))
