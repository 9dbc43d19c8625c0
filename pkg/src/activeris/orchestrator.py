"""Alternating optimisation of power, beamforming, phases and gains."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .beamforming import optimize_beamforming
from .model import (
    ChannelEstimates,
    ConfigurationError,
    ResourceState,
    RisState,
    SystemConfig,
    random_beamformers,
    sum_rate,
)
from .power import optimize_power
from .ris import optimize_gains, optimize_phases

BLOCKS = ("power", "beamforming", "phases", "gains")
MODES = ("active_optimized", "passive_optimized", "active_random_ris", "passive_random_ris")
DEFAULT_OUTER_MAX_ITERS = 50


@dataclass(frozen=True)
class OptimizationPlan:
    """Which blocks to run, in which order, and how the RIS is modelled.

    Passive modes pin every gain to one and drop the element noise; the
    random-RIS modes never touch phases or gains.
    """

    name: str
    blocks: tuple[str, ...] = BLOCKS
    mode: str = "active_optimized"
    outer_epsilon: Optional[float] = None
    outer_max_iters: int = DEFAULT_OUTER_MAX_ITERS

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}")
        unknown = set(self.blocks) - set(BLOCKS)
        if unknown:
            raise ConfigurationError(f"unknown blocks {sorted(unknown)}")
        if len(set(self.blocks)) != len(self.blocks):
            raise ConfigurationError("blocks listed twice")
        if self.passive and "gains" in self.blocks:
            raise ConfigurationError("passive modes keep unit gains; disable the gains block")
        if self.random_ris and ({"phases", "gains"} & set(self.blocks)):
            raise ConfigurationError("random-RIS modes must not optimise phases or gains")
        if self.outer_max_iters < 1:
            raise ConfigurationError("outer_max_iters must be >= 1")

    @property
    def passive(self) -> bool:
        return self.mode.startswith("passive")

    @property
    def random_ris(self) -> bool:
        return self.mode.endswith("random_ris")

    def system(self, cfg: SystemConfig) -> SystemConfig:
        """The configuration the plan actually optimises against."""
        return dataclasses.replace(cfg, sigma_n_sq=0.0) if self.passive else cfg


# The four RIS setups plus the no-RIS-optimisation baselines.
PLANS = {
    "none": OptimizationPlan("none", (), "active_random_ris"),
    "power_only": OptimizationPlan("power_only", ("power",), "active_random_ris"),
    "power_bf": OptimizationPlan("power_bf", ("power", "beamforming"), "active_random_ris"),
    "active_random_ris": OptimizationPlan("active_random_ris", ("power", "beamforming"), "active_random_ris"),
    "passive_random_ris": OptimizationPlan("passive_random_ris", ("power", "beamforming"), "passive_random_ris"),
    "passive_optimized": OptimizationPlan("passive_optimized", ("power", "beamforming", "phases"), "passive_optimized"),
    "active_optimized": OptimizationPlan("active_optimized", BLOCKS, "active_optimized"),
}


def get_plan(name: str) -> OptimizationPlan:
    try:
        return PLANS[name]
    except KeyError:
        raise ConfigurationError(f"unknown plan {name!r}; choose from {sorted(PLANS)}") from None


@dataclass(frozen=True)
class OptimizationReport:
    plan: str
    resources: ResourceState
    ris: RisState
    initial_rate: float
    trace: tuple[float, ...]
    loops: dict[str, tuple[int, ...]] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    @property
    def final_rate(self) -> float:
        return self.trace[-1]

    def mean_loops(self, block: str, first_only: bool = False) -> float:
        counts = self.loops.get(block, ())
        if not counts:
            return float("nan")
        return float(counts[0]) if first_only else float(np.mean(counts))


def initial_state(cfg: SystemConfig, plan: OptimizationPlan, seed) -> tuple[ResourceState, RisState]:
    """Random feasible starting point; the draw order is fixed so every plan
    sharing a seed starts from the same p, W and theta."""
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.0, cfg.p_max, cfg.K)
    W = random_beamformers(cfg.M, cfg.K, rng)
    theta = rng.uniform(0.0, 2 * np.pi, cfg.N)
    a = rng.uniform(0.0, cfg.a_max, cfg.N)
    if plan.passive:
        a = np.ones(cfg.N)
    return ResourceState(p, W), RisState(a, theta)


def run(cfg: SystemConfig, est: ChannelEstimates, plan: OptimizationPlan, seed,
        start: tuple[ResourceState, RisState] | None = None) -> OptimizationReport:
    """Optimise the enabled blocks in turn until the sum-rate stops improving.

    ``seed`` is anything ``numpy.random.default_rng`` accepts and fixes the
    random initial resources; ``start`` overrides them.
    """
    est.check(cfg)
    sys_cfg = plan.system(cfg)
    res, ris = start if start is not None else initial_state(cfg, plan, seed)
    if not res.is_feasible(cfg.p_max) or not ris.is_feasible(cfg.a_max):
        raise ConfigurationError("starting point is infeasible")
    tol = cfg.epsilon if plan.outer_epsilon is None else plan.outer_epsilon

    initial = sum_rate(sys_cfg, est, res, ris)
    trace = []
    loops: dict[str, list[int]] = {b: [] for b in plan.blocks}
    warnings: list[str] = []
    prev = initial
    for _ in range(plan.outer_max_iters):
        for block in plan.blocks:
            if block == "power":
                out = optimize_power(sys_cfg, est, res, ris)
                res = out.state
            elif block == "beamforming":
                out = optimize_beamforming(sys_cfg, est, res, ris)
                res = out.state
            elif block == "phases":
                out = optimize_phases(sys_cfg, est, res, ris)
                ris = out.state
            else:
                out = optimize_gains(sys_cfg, est, res, ris)
                ris = out.state
            loops[block].append(out.loops)
            warnings.extend(out.warnings)
        rate = sum_rate(sys_cfg, est, res, ris)
        trace.append(rate)
        if rate - prev <= tol:
            break
        prev = rate
    else:
        warnings.append(f"outer loop hit the {plan.outer_max_iters}-iteration cap")
    return OptimizationReport(
        plan=plan.name,
        resources=res,
        ris=ris,
        initial_rate=initial,
        trace=tuple(trace),
        loops={b: tuple(v) for b, v in loops.items()},
        warnings=tuple(warnings),
    )
