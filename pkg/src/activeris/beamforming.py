"""Receive beamforming by fractional programming (quadratic transform).

Every user's combiner maximises

    2 sqrt((1 + alpha_k) p_k) Re{beta_k^* w^H h_k} - |beta_k|^2 w^H Q w

subject to ||w||^2 = 1, where ``Q`` is the received covariance seen by a
combiner (all users' signals, RIS noise, CSI-error and receiver noise).
``Q`` does not depend on k, so it is built once per outer iteration.
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
    _gamma,
    _rate_nat,
    _terms,
)

log = logging.getLogger(__name__)

MAX_ITERS = 10_000
MAX_MU_STEPS = 2_000


class DegenerateUserError(ArithmeticError):
    """The unit-norm target cannot be met because beta_k or h_k vanishes."""


@dataclass(frozen=True)
class FpAuxiliaries:
    alpha: np.ndarray
    beta: np.ndarray
    mu: np.ndarray


def update_alpha(gamma) -> np.ndarray:
    return np.array(gamma, dtype=float, copy=True)


def update_beta(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState,
                ris: RisState, alpha) -> np.ndarray:
    _check(cfg, est, res, ris)
    t = _terms(cfg, est, res.W, res.p, ris.a, ris.theta)
    total = t.A @ res.p + t.psi
    if np.any(total <= 0):
        raise ArithmeticError("received power must be positive to form beta")
    alpha = np.asarray(alpha, dtype=float)
    return np.sqrt((1.0 + alpha) * res.p) * np.diag(t.S) / total


def fp_objective(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState,
                 ris: RisState, alpha, beta) -> float:
    """Quadratic-transform surrogate of the nat sum-rate."""
    t = _terms(cfg, est, res.W, res.p, ris.a, ris.theta)
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=complex)
    total = t.A @ res.p + t.psi
    cross = 2.0 * np.sqrt((1.0 + alpha) * res.p) * np.real(np.conj(beta) * np.diag(t.S))
    return float(np.sum(np.log1p(alpha) - alpha) + np.sum(cross) - np.sum(np.abs(beta) ** 2 * total))


def received_covariance(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState,
                        ris: RisState) -> np.ndarray:
    """Q = sum_i p_i h_i h_i^H + sigma_n^2 G Phi Phi^H G^H + c I."""
    phi = ris.phi
    h = est.h_d + est.H @ phi
    Gphi = est.G * phi[None, :]
    phi_n2 = float(np.dot(ris.a, ris.a))
    c = (cfg.sigma_G_sq * cfg.sigma_n_sq * phi_n2 + cfg.sigma_0_sq
         + float(np.dot(res.p, cfg.sigma_d + cfg.sigma_r * phi_n2)))
    Q = (h.T * res.p) @ h.conj() + cfg.sigma_n_sq * (Gphi @ Gphi.conj().T)
    Q[np.diag_indices_from(Q)] += c
    return Q


def _solve_w(Q, h_k, scale, beta_k, mu):
    A = mu * np.eye(Q.shape[0]) + abs(beta_k) ** 2 * Q
    return scale * np.conj(beta_k) * np.linalg.solve(A, h_k)


def closed_form_w(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState, ris: RisState,
                  alpha, beta, mu_k: float, k: int, Q: np.ndarray | None = None) -> np.ndarray:
    """Stationary point of the penalised surrogate for user ``k`` at multiplier ``mu_k``."""
    if not mu_k > 0:
        raise ValueError("mu_k must be positive")
    if Q is None:
        Q = received_covariance(cfg, est, res, ris)
    h_k = est.h_d[k] + est.H[k] @ ris.phi
    scale = np.sqrt((1.0 + alpha[k]) * res.p[k])
    w = _solve_w(Q, h_k, scale, beta[k], mu_k)
    if not np.all(np.isfinite(w)):
        raise FloatingPointError("non-finite beamformer from linear solve")
    return w


def solve_mu(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState, ris: RisState,
             alpha, beta, k: int, Q: np.ndarray | None = None,
             max_steps: int = MAX_MU_STEPS) -> tuple[np.ndarray, float, int]:
    """Search the norm multiplier so that | ||w_k||^2 - 1 | <= epsilon.

    Starts at mu = 1 and scales by delta (norm too small) or 1/delta (too
    large); once a bracket is known the search bisects instead.  If the
    norm stays below one as mu approaches zero, the search continues on the
    negative side towards -|beta_k|^2 lambda_min(Q), where the norm diverges
    unless h_k has no component along the weakest eigenvectors of Q.  In
    that case no multiplier reaches unit norm and the combiner found at the
    smallest positive mu is rescaled to unit norm (the SINR is invariant
    to the scale of w_k).

    Returns ``(w_k, mu_k, steps)``.
    """
    if Q is None:
        Q = received_covariance(cfg, est, res, ris)
    h_k = est.h_d[k] + est.H[k] @ ris.phi
    b = complex(beta[k])
    if b == 0 or not np.any(h_k):
        raise DegenerateUserError(f"user {k}: unit-norm combiner unreachable (beta or channel is zero)")
    scale = np.sqrt((1.0 + alpha[k]) * res.p[k])
    b2 = abs(b) ** 2
    eps = cfg.epsilon

    lo = None  # mu giving norm^2 > 1
    hi = None  # mu giving norm^2 < 1
    floor = None
    mu = 1.0
    best = None
    for step in range(max_steps):
        w = _solve_w(Q, h_k, scale, b, mu)
        n2 = float(np.vdot(w, w).real)
        if best is None or abs(n2 - 1.0) < best[2]:
            best = (w, mu, abs(n2 - 1.0))
        if abs(n2 - 1.0) <= eps:
            return w, mu, step
        if n2 < 1.0:
            hi = mu
        else:
            lo = mu
        if lo is not None and hi is not None:
            if hi - lo <= 1e-14 * max(abs(lo), abs(hi)):
                # bracket below double precision: the same hard case, numerically
                return best[0] / np.linalg.norm(best[0]), best[1], step + 1
            mu = np.sqrt(lo * hi) if lo > 0 else 0.5 * (lo + hi)
            continue
        if hi is not None:
            if floor is None:
                floor = 1e-12 * b2 * float(np.linalg.eigvalsh(Q)[-1])
            if mu > floor:
                mu = cfg.delta * mu
                continue
            pole = -b2 * float(np.linalg.eigvalsh(Q)[0])
            edge = pole + 1e-9 * (hi - pole)
            w_edge = _solve_w(Q, h_k, scale, b, edge)
            if float(np.vdot(w_edge, w_edge).real) < 1.0:
                return w / np.sqrt(n2), mu, step + 1
            lo = edge
            mu = 0.5 * (lo + hi)
        else:
            mu = mu / cfg.delta
    log.warning("user %d: mu search hit %d steps, |norm^2-1|=%.3e", k, max_steps, best[2])
    w = best[0]
    return w / np.linalg.norm(w), best[1], max_steps


def optimize_beamforming(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState,
                         ris: RisState, max_iters: int = MAX_ITERS) -> BlockOutcome:
    """Alternate alpha, beta and combiner updates until the nat sum-rate gains <= epsilon.

    Users with beta_k = 0 (zero power or zero effective gain) keep their
    previous combiner.
    """
    _check(cfg, est, res, ris)
    Q = received_covariance(cfg, est, res, ris)
    W = np.array(res.W)
    p = res.p
    cur_val = _rate_nat(cfg, est, W, p, ris.a, ris.theta)
    trace = [cur_val]
    warnings: list[str] = []
    converged = False
    loops = 0
    for _ in range(max_iters):
        state = ResourceState(p, W)
        alpha = update_alpha(_gamma(_terms(cfg, est, W, p, ris.a, ris.theta), p))
        beta = update_beta(cfg, est, state, ris, alpha)
        W_new = W.copy()
        for k in range(cfg.K):
            try:
                W_new[:, k], _, _ = solve_mu(cfg, est, state, ris, alpha, beta, k, Q=Q)
            except DegenerateUserError:
                pass
        new_val = _rate_nat(cfg, est, W_new, p, ris.a, ris.theta)
        loops += 1
        trace.append(new_val)
        gain = new_val - cur_val
        if new_val > cur_val:
            W, cur_val = W_new, new_val
        if gain <= cfg.epsilon:
            converged = True
            break
    else:
        warnings.append(f"beamforming hit the {max_iters}-iteration cap")
        log.warning(warnings[-1])
    return BlockOutcome(ResourceState(p, W), loops, converged, tuple(trace), tuple(warnings))
