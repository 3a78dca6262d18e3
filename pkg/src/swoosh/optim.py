"""Direct gradient descent on a pair of predicted heatmaps.

Stands in for network training: the two predictions are free pixel grids
pulled toward their targets by the fit terms and shaped by the swoosh terms.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import DegenerateHeatmap, DimensionMismatch, NonPositiveInput
from .heatmap import Heatmap, Landmark, argmax_landmark, dispersion, make_ground_truth
from .loss import LossConfig, compute_loss, loss_gradient

__all__ = [
    "OptimConfig",
    "StepRecord",
    "OptimTrace",
    "Scenario",
    "SCENARIOS",
    "optimize_pair",
    "compare_saf_effect",
    "SummaryRow",
    "disjoint_scenario",
    "overlapping_scenario",
    "ambiguous_scenario",
    "run_arms",
    "summarize",
]

DISPERSION_RADIUS = 9


@dataclass(frozen=True)
class OptimConfig:
    learning_rate: float
    max_steps: int
    seed: int = 0
    init_scale: float = 0.1
    use_saf: bool = True

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise NonPositiveInput(f"learning_rate must be > 0, got {self.learning_rate!r}")
        if self.max_steps < 0:
            raise NonPositiveInput(f"max_steps must be >= 0, got {self.max_steps!r}")
        if self.init_scale < 0:
            raise NonPositiveInput(f"init_scale must be >= 0, got {self.init_scale!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class StepRecord:
    step: int
    total: float
    mse_pair: float
    disp1: float
    disp2: float
    gate_active: bool
    learning_rate: float


@dataclass
class OptimTrace:
    records: list[StepRecord] = field(default_factory=list)
    final: tuple[Heatmap, Heatmap] | None = None
    # steps at which the learning rate was halved
    lr_halvings: list[int] = field(default_factory=list)

    @property
    def steps_executed(self) -> int:
        return len(self.records) - 1


def _safe_dispersion(v: np.ndarray) -> float:
    try:
        return dispersion(v, DISPERSION_RADIUS)
    except DegenerateHeatmap:
        return math.nan


def _record(step, p1, p2, g1, g2, loss_config, use_saf, lr) -> StepRecord:
    lb = compute_loss(p1, p2, g1, g2, loss_config)
    gate = lb.gate_active and use_saf
    total = lb.total if use_saf else lb.mse1 + lb.mse2
    d = p1 - p2
    return StepRecord(
        step=step,
        total=total,
        mse_pair=float(np.mean(d * d)),
        disp1=_safe_dispersion(p1),
        disp2=_safe_dispersion(p2),
        gate_active=gate,
        learning_rate=lr,
    )


def _fit_only_gradient(p1, p2, g1, g2):
    scale = 2.0 / p1.size
    return scale * (p1 - g1), scale * (p2 - g2)


def optimize_pair(gH1: Heatmap, gH2: Heatmap, loss_config: LossConfig, opt: OptimConfig) -> OptimTrace:
    """Fixed-step gradient descent from ``init_scale * U(0, 1)`` noise.

    With ``use_saf`` off only the two fit terms are minimized. A step taken
    with the gate open that increases the total loss halves the step size for
    the rest of the run.
    """
    g1, g2 = gH1.values, gH2.values
    if g1.shape != g2.shape:
        raise DimensionMismatch(f"target shapes differ: {g1.shape} vs {g2.shape}")
    rng = np.random.default_rng(opt.seed)
    p1 = opt.init_scale * rng.random(g1.shape)
    p2 = opt.init_scale * rng.random(g1.shape)
    lr = opt.learning_rate

    trace = OptimTrace()
    prev = _record(0, p1, p2, g1, g2, loss_config, opt.use_saf, lr)
    trace.records.append(prev)
    for step in range(1, opt.max_steps + 1):
        if opt.use_saf:
            d1, d2 = loss_gradient(p1, p2, g1, g2, loss_config)
        else:
            d1, d2 = _fit_only_gradient(p1, p2, g1, g2)
        p1 = p1 - lr * d1
        p2 = p2 - lr * d2
        rec = _record(step, p1, p2, g1, g2, loss_config, opt.use_saf, lr)
        # a step taken with the gate open that raised the loss, even if it closed the gate
        if prev.gate_active and rec.total > prev.total:
            lr *= 0.5
            trace.lr_halvings.append(step)
        trace.records.append(rec)
        prev = rec
    trace.final = (Heatmap(p1), Heatmap(p2))
    return trace


# -- scenarios -------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    gH1: Heatmap
    gH2: Heatmap
    truth: tuple[Landmark, Landmark]


def disjoint_scenario(width: int = 96, height: int = 96, sigma: float = 3) -> Scenario:
    a = Landmark(width // 4, height // 2)
    b = Landmark(3 * width // 4, height // 2)
    return Scenario(
        make_ground_truth(width, height, a, sigma), make_ground_truth(width, height, b, sigma), (a, b)
    )


def overlapping_scenario(width: int = 96, height: int = 96, sigma: float = 3) -> Scenario:
    # centers closer than one patch side
    a = Landmark(width // 2 - 6, height // 2)
    b = Landmark(width // 2 + 6, height // 2)
    return Scenario(
        make_ground_truth(width, height, a, sigma), make_ground_truth(width, height, b, sigma), (a, b)
    )


def ambiguous_scenario(width: int = 96, height: int = 96, sigma: float = 3) -> Scenario:
    """Both targets are ``0.5 * (A + B)`` for two disjoint hotspots A and B."""
    base = disjoint_scenario(width, height, sigma)
    mix = Heatmap(0.5 * (base.gH1.values + base.gH2.values))
    return Scenario(mix, mix, base.truth)


SCENARIOS: dict[str, Callable[..., Scenario]] = {
    "disjoint": disjoint_scenario,
    "overlapping": overlapping_scenario,
    "ambiguous": ambiguous_scenario,
}


@dataclass(frozen=True)
class SummaryRow:
    scenario: str
    use_saf: bool
    final_loss: float
    pair_mse: float
    disp1: float
    disp2: float
    argmax_error: float
    separation: float

    @staticmethod
    def header() -> list[str]:
        return ["scenario", "use_saf", "final_loss", "pair_mse", "disp1", "disp2", "argmax_error", "separation"]


def _dist(p: Landmark, q: Landmark) -> float:
    return math.hypot(p.x - q.x, p.y - q.y)


def argmax_error(final: tuple[Heatmap, Heatmap], truth: tuple[Landmark, Landmark]) -> float:
    """Worse of the two decoded-landmark errors under the better of the two assignments."""
    l1, l2 = argmax_landmark(final[0]), argmax_landmark(final[1])
    t1, t2 = truth
    return min(max(_dist(l1, t1), _dist(l2, t2)), max(_dist(l1, t2), _dist(l2, t1)))


def argmax_separation(final: tuple[Heatmap, Heatmap]) -> float:
    return _dist(argmax_landmark(final[0]), argmax_landmark(final[1]))


def summarize(name: str, use_saf: bool, trace: OptimTrace, truth) -> SummaryRow:
    last = trace.records[-1]
    return SummaryRow(
        scenario=name,
        use_saf=use_saf,
        final_loss=last.total,
        pair_mse=last.mse_pair,
        disp1=last.disp1,
        disp2=last.disp2,
        argmax_error=argmax_error(trace.final, truth),
        separation=argmax_separation(trace.final),
    )


def run_arms(
    scenario: Scenario, loss_config: LossConfig, opt: OptimConfig
) -> dict[bool, OptimTrace]:
    """Run the no-SAF and SAF arms from the same seed."""
    return {
        flag: optimize_pair(scenario.gH1, scenario.gH2, loss_config, _with_saf(opt, flag))
        for flag in (False, True)
    }


def _with_saf(opt: OptimConfig, flag: bool) -> OptimConfig:
    return OptimConfig(opt.learning_rate, opt.max_steps, opt.seed, opt.init_scale, flag)


def compare_saf_effect(
    scenarios: Mapping[str, Scenario | Callable[[], Scenario]],
    loss_config: LossConfig,
    opt: OptimConfig,
    workers: int = 1,
) -> list[SummaryRow]:
    """Paired SAF/no-SAF metrics per scenario, in input order."""
    names = list(scenarios)

    def one(name):
        sc = scenarios[name]
        if callable(sc):
            sc = sc()
        traces = run_arms(sc, loss_config, opt)
        return [summarize(name, flag, traces[flag], sc.truth) for flag in (False, True)]

    if workers > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, names))
    else:
        results = [one(n) for n in names]
    return [row for rows in results for row in rows]
