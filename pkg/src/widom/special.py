"""Gamma function by the Lanczos approximation (g = 7, nine terms)."""

import math

_G = 7.0
_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def lanczos_lgamma(x: float) -> float:
    """log|Gamma(x)| for real x not a nonpositive integer."""
    if x < 0.5:
        s = math.sin(math.pi * x)
        if s == 0.0:
            raise ValueError(f"Gamma has a pole at {x!r}")
        return math.log(math.pi / abs(s)) - lanczos_lgamma(1.0 - x)
    x -= 1.0
    acc = _COEF[0]
    for k in range(1, len(_COEF)):
        acc += _COEF[k] / (x + k)
    t = x + _G + 0.5
    return _HALF_LOG_2PI + (x + 0.5) * math.log(t) - t + math.log(acc)


def lanczos_gamma(x: float) -> float:
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * lanczos_gamma(1.0 - x))
    x -= 1.0
    acc = _COEF[0]
    for k in range(1, len(_COEF)):
        acc += _COEF[k] / (x + k)
    t = x + _G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def gamma_ratio(a: float, b: float) -> float:
    """Gamma(a) / Gamma(b) for positive a, b."""
    if a <= 0 or b <= 0:
        raise ValueError("gamma_ratio needs positive arguments")
    if a < 140 and b < 140:
        return lanczos_gamma(a) / lanczos_gamma(b)
    return math.exp(lanczos_lgamma(a) - lanczos_lgamma(b))
