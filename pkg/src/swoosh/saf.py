"""Swoosh activation: a check-mark shaped penalty with a single minimum at ``x_star``.

    f(x) = (a*x + 1/(b*x))**c - min_offset,   x > 0

``b`` places the minimum of the inner term at ``x_star`` and ``c`` pins the
unshifted value at the minimum to ``min_offset``, so that ``f(x_star) == 0``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateExponent, NonPositiveInput

__all__ = [
    "SafCoefficients",
    "solve_coefficients",
    "saf_eval",
    "saf_derivative",
    "saf_raw",
]


@dataclass(frozen=True)
class SafCoefficients:
    a: float
    b: float
    c: float
    min_offset: float
    x_star: float

    def __post_init__(self):
        for name in ("a", "b", "c", "min_offset", "x_star"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise NonPositiveInput(f"{name} must be a positive finite number, got {v!r}")

    def to_json(self) -> dict:
        d = asdict(self)
        d["min"] = d.pop("min_offset")
        return d

    @classmethod
    def from_json(cls, d: dict) -> "SafCoefficients":
        return cls(
            a=float(d["a"]),
            b=float(d["b"]),
            c=float(d["c"]),
            min_offset=float(d["min"]),
            x_star=float(d["x_star"]),
        )


def solve_coefficients(a: float, x_star: float, min_offset: float) -> SafCoefficients:
    """Solve ``b`` and ``c`` so the curve bottoms out at ``x_star`` with value 0.

    The inner term ``a*x + 1/(b*x)`` is stationary at ``sqrt(1/(a*b))``, which
    gives ``b = 1/(a*x_star**2)``. Its value there is ``2*a*x_star``, and
    ``(2*a*x_star)**c == min_offset`` gives ``c``.
    """
    for name, v in (("a", a), ("x_star", x_star), ("min_offset", min_offset)):
        if not (math.isfinite(v) and v > 0):
            raise NonPositiveInput(f"{name} must be > 0, got {v!r}")
    inner_min = 2.0 * a * x_star
    if inner_min == 1.0 or min_offset == 1.0:
        raise DegenerateExponent(
            f"exponent undefined or zero: 2*a*x_star={inner_min!r}, min_offset={min_offset!r}"
        )
    c = math.log(min_offset) / math.log(inner_min)
    if not c > 0:
        raise DegenerateExponent(
            f"exponent c={c:.6g} is not positive; need 2*a*x_star < 1 when min_offset < 1 "
            f"(got 2*a*x_star={inner_min:.6g}, min_offset={min_offset:.6g})"
        )
    b = 1.0 / (a * x_star * x_star)
    return SafCoefficients(a=float(a), b=b, c=c, min_offset=float(min_offset), x_star=float(x_star))


def _check_positive(x):
    arr = np.asarray(x, dtype=float)
    if arr.size and not np.all(arr > 0):
        raise NonPositiveInput("SAF is defined for x > 0 only")
    return arr


def _inner(coeffs: SafCoefficients, x):
    return coeffs.a * x + 1.0 / (coeffs.b * x)


def saf_raw(coeffs: SafCoefficients, x):
    """Unshifted value ``(a*x + 1/(b*x))**c``."""
    arr = _check_positive(x)
    out = np.exp(coeffs.c * np.log(_inner(coeffs, arr)))
    return float(out) if np.ndim(x) == 0 else out


def saf_eval(coeffs: SafCoefficients, x):
    """Evaluate the activation at ``x > 0``; accepts scalars or arrays."""
    arr = _check_positive(x)
    out = np.exp(coeffs.c * np.log(_inner(coeffs, arr))) - coeffs.min_offset
    # rounding at the minimum can leave a -1e-19 residue
    out = np.maximum(out, 0.0)
    return float(out) if np.ndim(x) == 0 else out


def saf_derivative(coeffs: SafCoefficients, x):
    """Analytic derivative ``c*t**(c-1) * (a - 1/(b*x**2))`` with ``t`` the inner term."""
    arr = _check_positive(x)
    t = _inner(coeffs, arr)
    out = coeffs.c * np.exp((coeffs.c - 1.0) * np.log(t)) * (coeffs.a - 1.0 / (coeffs.b * arr * arr))
    return float(out) if np.ndim(x) == 0 else out
