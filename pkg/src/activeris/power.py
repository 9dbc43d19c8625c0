"""Transmit-power allocation by successive linearisation and clamped gradient ascent.

The natural-log sum-rate is split as ``sum_k ln(T_k) - sum_k ln(I_k)`` with
``T_k`` the total received power at combiner k (signal + interference + psi)
and ``I_k`` the interference-plus-psi term.  The second sum (the non-concave
part) is linearised around the expansion point, the remainder is concave in
``p``, and one projected gradient step is taken per linearisation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .model import (
    BlockOutcome,
    ChannelEstimates,
    ResourceState,
    RisState,
    SystemConfig,
    _check,
    _offdiag,
    _rate_nat,
    _terms,
)

log = logging.getLogger(__name__)

MAX_ITERS = 10_000


class PowerAllocationError(ArithmeticError):
    """A denominator that must be positive was not (requires sigma_0^2 > 0)."""


@dataclass(frozen=True)
class PowerIterate:
    """Expansion point of the linearisation and psi evaluated there."""

    p_expand: np.ndarray
    psi_at_expand: np.ndarray
    r: int = 0

    def check(self, p_max: float) -> None:
        if np.any(self.p_expand < 0) or np.any(self.p_expand > p_max):
            raise ValueError("expansion point is outside [0, p_max]")


def expansion_point(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState,
                    ris: RisState, r: int = 0) -> PowerIterate:
    """Linearise around the powers currently held in ``res``."""
    t = _terms(cfg, est, res.W, res.p, ris.a, ris.theta)
    return PowerIterate(np.array(res.p, dtype=float), t.psi, r)


def _coupling(cfg, est, res, ris):
    """Return (terms, F) with F[k, u] = d T_k / d p_u = A_ku + ||w_k||^2 (sd_u + sr_u ||phi||^2)."""
    t = _terms(cfg, est, res.W, res.p, ris.a, ris.theta)
    F = t.A + np.outer(t.wn2, t.err_coef)
    return t, F


def sngv_gradients(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState,
                   ris: RisState, iterate: PowerIterate) -> np.ndarray:
    """Slopes of the linearised negative sum, one per user, at ``iterate.p_expand``."""
    _check(cfg, est, res, ris)
    iterate.check(cfg.p_max)
    t, F = _coupling(cfg, est, res, ris)
    E = F.copy()
    np.fill_diagonal(E, t.wn2 * t.err_coef)  # own signal is absent from I_k
    denom = _offdiag(t.A) @ iterate.p_expand + iterate.psi_at_expand
    if np.any(denom <= 0):
        raise PowerAllocationError("non-positive interference-plus-noise at the expansion point")
    return (E / denom[:, None]).sum(axis=0)


def sngv_gradient(cfg, est, res, ris, iterate: PowerIterate, u: int) -> float:
    return float(sngv_gradients(cfg, est, res, ris, iterate)[u])


def lagrangian_gradients(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState,
                         ris: RisState, iterate: PowerIterate) -> np.ndarray:
    """Gradient of the linearised objective with both multipliers set to zero.

    The concave log-sum is differentiated at the current powers ``res.p``;
    the linearised part contributes its constant slope from ``iterate``.
    """
    _check(cfg, est, res, ris)
    t, F = _coupling(cfg, est, res, ris)
    total = t.A @ res.p + t.psi
    if np.any(total <= 0):
        raise PowerAllocationError("non-positive received power")
    first = (F / total[:, None]).sum(axis=0)
    return first - sngv_gradients(cfg, est, res, ris, iterate)


def lagrangian_gradient(cfg, est, res, ris, iterate: PowerIterate, u: int) -> float:
    return float(lagrangian_gradients(cfg, est, res, ris, iterate)[u])


def clamp_power(chi: np.ndarray | float, p_max: float) -> np.ndarray | float:
    return np.minimum(p_max, np.maximum(0.0, chi))


def power_step(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState,
               ris: RisState, iterate: PowerIterate) -> np.ndarray:
    """One clamped ascent step taken from the expansion point."""
    chi = iterate.p_expand + cfg.step_p * lagrangian_gradients(cfg, est, res, ris, iterate)
    return clamp_power(chi, cfg.p_max)


def optimize_power(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState,
                   ris: RisState, max_iters: int = MAX_ITERS) -> BlockOutcome:
    """Re-linearise and step until the natural-log sum-rate gains at most ``epsilon``.

    Returns the best iterate seen; ``loops`` counts the steps taken.
    """
    _check(cfg, est, res, ris)
    if not res.is_feasible(cfg.p_max):
        raise ValueError("initial powers are infeasible")
    cur = res
    cur_val = _rate_nat(cfg, est, res.W, res.p, ris.a, ris.theta)
    trace = [cur_val]
    warnings: list[str] = []
    converged = False
    loops = 0
    for r in range(max_iters):
        it = expansion_point(cfg, est, cur, ris, r)
        p_new = power_step(cfg, est, cur, ris, it)
        new_val = _rate_nat(cfg, est, cur.W, p_new, ris.a, ris.theta)
        loops += 1
        trace.append(new_val)
        improved = new_val - cur_val
        if new_val > cur_val:
            cur, cur_val = ResourceState(p_new, cur.W), new_val
        if improved <= cfg.epsilon:
            converged = True
            break
    else:
        warnings.append(f"power allocation hit the {max_iters}-iteration cap")
        log.warning(warnings[-1])
    return BlockOutcome(cur, loops, converged, tuple(trace), tuple(warnings))
