"""Monte Carlo sweeps over RIS size, user count or CSI-error variance."""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import ChannelEstimates, ConfigurationError, SystemConfig
from .orchestrator import BLOCKS, OptimizationPlan, run

log = logging.getLogger(__name__)

SWEEP_VARIABLES = ("N", "K", "csi_error_variance")
DEFAULT_TRIALS = 200


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-variance circularly-symmetric complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def generate_channels(cfg: SystemConfig, rng: np.random.Generator) -> ChannelEstimates:
    """Rayleigh direct links and double-Rayleigh cascaded links with unit power."""
    G = _cn(rng, (cfg.M, cfg.N))
    h_r = _cn(rng, (cfg.K, cfg.N))
    h_d = _cn(rng, (cfg.K, cfg.M))
    H = G[None, :, :] * h_r[:, None, :]
    return ChannelEstimates(h_d, H, G)


def configure(template: SystemConfig, variable: str, value) -> SystemConfig:
    """Apply one sweep value to the template configuration."""
    if variable == "N":
        return dataclasses.replace(template, N=int(value))
    if variable == "K":
        return dataclasses.replace(template, K=int(value), sigma_d_sq=_scalar(template.sigma_d_sq),
                                   sigma_r_sq=_scalar(template.sigma_r_sq))
    if variable == "csi_error_variance":
        v = float(value)
        return dataclasses.replace(template, sigma_d_sq=v, sigma_r_sq=v, sigma_G_sq=v)
    raise ConfigurationError(f"unknown sweep variable {variable!r}")


def _scalar(v):
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        return float(arr)
    if np.all(arr == arr[0]):
        return float(arr[0])
    raise ConfigurationError("per-user variances cannot be swept over K; use a scalar")


@dataclass(frozen=True)
class ScenarioSpec:
    cfg: SystemConfig
    sweep: str
    values: tuple
    plans: tuple[OptimizationPlan, ...]
    num_trials: int = DEFAULT_TRIALS
    seed: int = 0

    def __post_init__(self):
        if self.sweep not in SWEEP_VARIABLES:
            raise ConfigurationError(f"sweep must be one of {SWEEP_VARIABLES}")
        if self.num_trials < 1:
            raise ConfigurationError("num_trials must be >= 1")
        vals = tuple(self.values)
        if not vals or any(not v > 0 for v in vals) or list(vals) != sorted(vals):
            raise ConfigurationError("sweep values must be positive and sorted")
        if not self.plans:
            raise ConfigurationError("at least one plan is required")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "plans", tuple(self.plans))


@dataclass(frozen=True)
class PointResult:
    sweep_value: float
    plan: str
    mean_rate: float
    std_rate: float
    n_trials: int
    n_failed: int
    mean_loops: dict[str, float] = field(default_factory=dict)
    rates: tuple[float, ...] = field(default=(), repr=False)

    @property
    def stderr(self) -> float:
        return self.std_rate / np.sqrt(self.n_trials) if self.n_trials else float("nan")


@dataclass(frozen=True)
class AggregateResult:
    points: tuple[PointResult, ...]
    warnings: tuple[str, ...] = ()

    def get(self, sweep_value, plan: str) -> PointResult:
        for pt in self.points:
            if pt.plan == plan and pt.sweep_value == sweep_value:
                return pt
        raise KeyError((sweep_value, plan))

    def curve(self, plan: str) -> list[PointResult]:
        return [pt for pt in self.points if pt.plan == plan]


def trial_seeds(seed: int, sweep_index: int, trial_index: int) -> tuple[np.random.SeedSequence, np.random.SeedSequence]:
    """Independent (channel, initialisation) streams for one trial."""
    root = np.random.SeedSequence([seed, sweep_index, trial_index])
    return tuple(root.spawn(2))


def _run_trial(args):
    cfg, plans, seed, si, ti = args
    ch_seed, init_seed = trial_seeds(seed, si, ti)
    est = generate_channels(cfg, np.random.default_rng(ch_seed))
    out = []
    for plan in plans:
        try:
            rep = run(cfg, est, plan, init_seed)
        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            out.append((None, {}, (f"{plan.name} trial {ti}: {exc}",)))
            continue
        loops = {b: rep.mean_loops(b, first_only=True) for b in rep.loops}
        out.append((rep.final_rate, loops, rep.warnings))
    return si, ti, out


def run_scenario(spec: ScenarioSpec, workers: int = 1) -> AggregateResult:
    """Run every plan on the same channel draws for each sweep point.

    Results do not depend on ``workers``: each trial owns its random
    streams and aggregation happens in a fixed order afterwards.
    """
    cfgs = [configure(spec.cfg, spec.sweep, v) for v in spec.values]
    jobs = [(cfgs[si], spec.plans, spec.seed, si, ti)
            for si in range(len(cfgs)) for ti in range(spec.num_trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        done = [_run_trial(j) for j in jobs]
    done.sort(key=lambda r: (r[0], r[1]))

    points = []
    warnings: list[str] = []
    for si, value in enumerate(spec.values):
        rows = [r[2] for r in done if r[0] == si]
        for pi, plan in enumerate(spec.plans):
            rates, loop_rows = [], []
            for row in rows:
                rate, loops, warns = row[pi]
                warnings.extend(f"[{spec.sweep}={value}] {w}" for w in warns)
                if rate is not None:
                    rates.append(rate)
                    loop_rows.append(loops)
            arr = np.array(rates)
            mean_loops = {
                b: float(np.nanmean([lr[b] for lr in loop_rows if b in lr]))
                for b in BLOCKS if any(b in lr for lr in loop_rows)
            }
            points.append(PointResult(
                sweep_value=value,
                plan=plan.name,
                mean_rate=float(arr.mean()) if arr.size else float("nan"),
                std_rate=float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
                n_trials=int(arr.size),
                n_failed=len(rows) - int(arr.size),
                mean_loops=mean_loops,
                rates=tuple(rates),
            ))
    for w in warnings:
        log.warning(w)
    return AggregateResult(tuple(points), tuple(warnings))
