"""Projected gradient ascent on the RIS phases and gains."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .model import (
    LN2,
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
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class RisGradient:
    d_a: np.ndarray
    d_theta: np.ndarray


def _conj_gradient(cfg: SystemConfig, est: ChannelEstimates, W: np.ndarray, p: np.ndarray,
                   a: np.ndarray, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Wirtinger gradient of the nat sum-rate w.r.t. conj(phi); returns (g, phi)."""
    t = _terms(cfg, est, W, p, a, theta)
    K = p.shape[0]
    total = t.A @ p + t.psi
    interf = _offdiag(t.A) @ p + t.psi
    # C[k, n] = sum_i p_i S[k,i] (H_i^H w_k)_n, the d/dconj(phi) of sum_i p_i |w_k^H h_i|^2
    HhW = np.einsum("imn,mk->kin", est.H.conj(), W)  # (K, K, N): H_i^H w_k
    C = np.einsum("ki,kin->kn", t.S * p[None, :], HhW)
    own = (p * np.diag(t.S))[:, None] * HhW[np.arange(K), np.arange(K)]
    noise_scale = t.wn2 * (np.dot(p, cfg.sigma_r) + cfg.sigma_G_sq * cfg.sigma_n_sq)
    dT = C + cfg.sigma_n_sq * t.gw2 * t.phi[None, :] + noise_scale[:, None] * t.phi[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_T = np.where(total > 0, 1.0 / total, 0.0)
        inv_I = np.where(interf > 0, 1.0 / interf, 0.0)
    g = ((inv_T - inv_I)[:, None] * dT).sum(axis=0) + (inv_I[:, None] * own).sum(axis=0)
    return g, t.phi


def _ris_gradient(cfg, est, W, p, a, theta) -> RisGradient:
    g, phi = _conj_gradient(cfg, est, W, p, a, theta)
    unit = np.exp(1j * theta)
    d_a = 2.0 * np.real(np.conj(unit) * g) / LN2
    d_theta = 2.0 * np.real(np.conj(1j * phi) * g) / LN2
    return RisGradient(d_a, d_theta)


def ris_gradient(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState, ris: RisState) -> RisGradient:
    """Partial derivatives of the sum-rate (bit/s/Hz) w.r.t. every gain and phase.

    Derived by the chain rule through phi_n = a_n exp(j theta_n); the
    sum-rate depends on phi via the combined channels, the RIS-noise term
    and ||phi||^2 inside the CSI-error terms.
    """
    _check(cfg, est, res, ris)
    return _ris_gradient(cfg, est, res.W, res.p, ris.a, ris.theta)


def project_gain(x, a_max: float):
    return np.minimum(np.maximum(0.0, x), a_max)


def project_phase(x):
    """Wrap into [0, 2*pi) without changing exp(j*x)."""
    y = np.mod(x, TWO_PI)
    # mod of a tiny negative number rounds up to exactly 2*pi
    y = np.where(y >= TWO_PI, 0.0, y)
    return float(y) if np.ndim(y) == 0 else y


def _ascend(cfg, est, res, ris, *, variable: str, step: float, tol: float, max_iters: int) -> BlockOutcome:
    _check(cfg, est, res, ris)
    W, p = res.W, res.p
    a, theta = np.array(ris.a), np.array(ris.theta)
    cur_val = _rate_nat(cfg, est, W, p, a, theta) / LN2
    trace = [cur_val]
    warnings: list[str] = []
    converged = False
    loops = 0
    for _ in range(max_iters):
        grad = _ris_gradient(cfg, est, W, p, a, theta)
        if variable == "theta":
            new_a, new_theta = a, project_phase(theta + step * grad.d_theta)
        else:
            new_a, new_theta = project_gain(a + step * grad.d_a, cfg.a_max), theta
        new_val = _rate_nat(cfg, est, W, p, new_a, new_theta) / LN2
        loops += 1
        trace.append(new_val)
        gain = new_val - cur_val
        if gain < 0:
            log.debug("non-monotone %s step: sum-rate fell by %.3e", variable, -gain)
        if new_val > cur_val:
            a, theta, cur_val = new_a, new_theta, new_val
        if gain <= tol:
            converged = True
            break
    else:
        warnings.append(f"{variable} ascent hit the {max_iters}-iteration cap")
        log.warning(warnings[-1])
    return BlockOutcome(RisState(a, np.atleast_1d(theta)), loops, converged, tuple(trace), tuple(warnings))


def optimize_phases(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState, ris: RisState,
                    max_iters: int = MAX_ITERS) -> BlockOutcome:
    """Projected ascent over the phases; stops once a step gains at most ``epsilon`` bit/s/Hz."""
    return _ascend(cfg, est, res, ris, variable="theta", step=cfg.step_theta,
                   tol=cfg.epsilon, max_iters=max_iters)


def optimize_gains(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState, ris: RisState,
                   max_iters: int = MAX_ITERS) -> BlockOutcome:
    """Projected ascent over the gains with tolerance ``cfg.gain_tolerance``."""
    return _ascend(cfg, est, res, ris, variable="a", step=cfg.step_a,
                   tol=cfg.gain_tolerance, max_iters=max_iters)
