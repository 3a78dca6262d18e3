"""Two-heatmap landmark loss with gated swoosh regularization.

    total = mse(p1, g1) + mse(p2, g2)
            + gate * [saf_pair(mse(p1, p2)) + saf_zero(mse(p1, 0)) + saf_zero(mse(p2, 0))]

The gate opens when the mean of the two fit terms drops below
``gate_threshold`` and is treated as a constant when differentiating.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonPositiveInput
from .heatmap import Heatmap
from .saf import SafCoefficients, saf_derivative, saf_eval, solve_coefficients

__all__ = ["LossConfig", "LossBreakdown", "compute_loss", "loss_gradient"]

# SAF is undefined at 0; an exact-zero MSE is evaluated here instead (times x_star)
ZERO_MSE_SUBSTITUTE = 1e-6


@dataclass(frozen=True)
class LossConfig:
    saf_pair: SafCoefficients
    saf_zero: SafCoefficients
    gate_threshold: float = 0.0009

    def __post_init__(self):
        if not self.gate_threshold > 0:
            raise NonPositiveInput(f"gate_threshold must be > 0, got {self.gate_threshold!r}")
        if abs(self.saf_zero.x_star - self.saf_pair.x_star / 2) > 1e-12:
            raise ValueError("saf_zero.x_star must be half of saf_pair.x_star")

    @classmethod
    def from_values(
        cls, a: float, pair_x_star: float, min_offset: float = 0.001, gate_threshold: float = 0.0009
    ) -> "LossConfig":
        """Solve both curves from a shared ``a``; the zero-matrix curve sits at half the pair optimum."""
        return cls(
            saf_pair=solve_coefficients(a, pair_x_star, min_offset),
            saf_zero=solve_coefficients(a, pair_x_star / 2, min_offset),
            gate_threshold=gate_threshold,
        )

    def to_json(self) -> dict:
        # b and c are always re-solved on load
        return {
            "a": self.saf_pair.a,
            "pair_x_star": self.saf_pair.x_star,
            "min_offset": self.saf_pair.min_offset,
            "gate_threshold": self.gate_threshold,
        }

    @classmethod
    def from_json(cls, d: dict) -> "LossConfig":
        return cls.from_values(
            float(d["a"]), float(d["pair_x_star"]), float(d["min_offset"]), float(d["gate_threshold"])
        )


@dataclass(frozen=True)
class LossBreakdown:
    mse1: float
    mse2: float
    saf_pair_term: float
    saf_zero1_term: float
    saf_zero2_term: float
    gate_active: bool
    total: float


def _arrays(*hs):
    arrs = [h.values if isinstance(h, Heatmap) else np.asarray(h, dtype=float) for h in hs]
    shape = arrs[0].shape
    for a in arrs[1:]:
        if a.shape != shape:
            raise DimensionMismatch(f"heatmap shapes differ: {shape} vs {a.shape}")
    return arrs


def _safe_x(x: float, coeffs: SafCoefficients) -> float:
    return x if x > 0 else coeffs.x_star * ZERO_MSE_SUBSTITUTE


def _mse(a, b=None) -> float:
    d = a if b is None else a - b
    return float(np.mean(d * d))


def compute_loss(pH1, pH2, gH1, gH2, config: LossConfig) -> LossBreakdown:
    p1, p2, g1, g2 = _arrays(pH1, pH2, gH1, gH2)
    m1, m2 = _mse(p1, g1), _mse(p2, g2)
    gate = (m1 + m2) / 2 < config.gate_threshold
    pair = zero1 = zero2 = 0.0
    if gate:
        pair = saf_eval(config.saf_pair, _safe_x(_mse(p1, p2), config.saf_pair))
        zero1 = saf_eval(config.saf_zero, _safe_x(_mse(p1), config.saf_zero))
        zero2 = saf_eval(config.saf_zero, _safe_x(_mse(p2), config.saf_zero))
    total = m1 + m2 + (pair + zero1 + zero2 if gate else 0.0)
    return LossBreakdown(m1, m2, pair, zero1, zero2, gate, total)


def loss_gradient(pH1, pH2, gH1, gH2, config: LossConfig) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form gradients of ``compute_loss(...).total`` w.r.t. both predictions."""
    p1, p2, g1, g2 = _arrays(pH1, pH2, gH1, gH2)
    scale = 2.0 / p1.size
    d1 = scale * (p1 - g1)
    d2 = scale * (p2 - g2)
    if (_mse(p1, g1) + _mse(p2, g2)) / 2 < config.gate_threshold:
        diff = p1 - p2
        k_pair = saf_derivative(config.saf_pair, _safe_x(_mse(diff), config.saf_pair)) * scale
        k1 = saf_derivative(config.saf_zero, _safe_x(_mse(p1), config.saf_zero)) * scale
        k2 = saf_derivative(config.saf_zero, _safe_x(_mse(p2), config.saf_zero)) * scale
        d1 = d1 + k_pair * diff + k1 * p1
        d2 = d2 - k_pair * diff + k2 * p2
    return d1, d2
