"""System model: domain types, combined channels, per-user SINR and sum-rate.

Array conventions used throughout the package:

* ``h_d``  -- (K, M) estimated direct channels, row k is the vector for user k
* ``H``    -- (K, M, N) estimated cascaded channels G diag(h_r,k)
* ``G``    -- (M, N) estimated RIS-to-BS channel
* ``W``    -- (M, K) receive beamformers, column k decodes user k
* ``p``    -- (K,) transmit powers in watts
* ``a``/``theta`` -- (N,) element gains and phases
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

LN2 = float(np.log(2.0))

ArrayLike = Union[float, Sequence[float], np.ndarray]


class ConfigurationError(ValueError):
    """Raised for inconsistent dimensions or out-of-range parameters."""


def _frozen(x, dtype) -> np.ndarray:
    arr = np.array(x, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SystemConfig:
    """Scalar parameters of one uplink scenario, all powers/variances linear.

    ``sigma_d_sq`` and ``sigma_r_sq`` accept either a scalar (same variance
    for every user) or a length-K sequence.
    """

    M: int = 10
    N: int = 30
    K: int = 5
    p_max: float = 0.1
    a_max: float = 4.0
    sigma_n_sq: float = 1e-6
    sigma_0_sq: float = 1e-7
    sigma_d_sq: ArrayLike = 1e-7
    sigma_r_sq: ArrayLike = 1e-7
    sigma_G_sq: float = 1e-7
    step_p: float = 0.1
    step_a: float = 0.1
    step_theta: float = 0.1
    epsilon: float = 1e-2
    epsilon_gain: Optional[float] = 5e-3
    delta: float = 0.9

    def __post_init__(self):
        if self.M < 1 or self.K < 1 or self.N < 0:
            raise ConfigurationError(f"need M>=1, K>=1, N>=0 (got M={self.M}, N={self.N}, K={self.K})")
        for name in ("M", "N", "K"):
            if int(getattr(self, name)) != getattr(self, name):
                raise ConfigurationError(f"{name} must be an integer")
        if not self.p_max > 0 or not self.a_max > 0:
            raise ConfigurationError("p_max and a_max must be positive")
        if not 0 < self.delta < 1:
            raise ConfigurationError("delta must lie in (0, 1)")
        if not self.epsilon > 0:
            raise ConfigurationError("epsilon must be positive")
        if self.epsilon_gain is not None and not self.epsilon_gain > 0:
            raise ConfigurationError("epsilon_gain must be positive")
        for name in ("step_p", "step_a", "step_theta"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        for name in ("sigma_n_sq", "sigma_0_sq", "sigma_G_sq"):
            if not getattr(self, name) >= 0:
                raise ConfigurationError(f"{name} must be non-negative")
        for name in ("sigma_d_sq", "sigma_r_sq"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.ndim > 1 or (v.ndim == 1 and v.shape[0] != self.K):
                raise ConfigurationError(f"{name} must be a scalar or length-K sequence")
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise ConfigurationError(f"{name} must be finite and non-negative")

    @property
    def sigma_d(self) -> np.ndarray:
        """Per-user direct-channel error variances, shape (K,)."""
        return np.broadcast_to(np.asarray(self.sigma_d_sq, dtype=float), (self.K,))

    @property
    def sigma_r(self) -> np.ndarray:
        """Per-user cascaded-channel error variances, shape (K,)."""
        return np.broadcast_to(np.asarray(self.sigma_r_sq, dtype=float), (self.K,))

    @property
    def gain_tolerance(self) -> float:
        return self.epsilon if self.epsilon_gain is None else self.epsilon_gain


@dataclass(frozen=True)
class ChannelEstimates:
    h_d: np.ndarray
    H: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        h_d = _frozen(self.h_d, complex)
        H = _frozen(self.H, complex)
        G = _frozen(self.G, complex)
        if h_d.ndim != 2 or H.ndim != 3 or G.ndim != 2:
            raise ConfigurationError("expected h_d (K,M), H (K,M,N), G (M,N)")
        K, M = h_d.shape
        if H.shape[:2] != (K, M) or G.shape != (M, H.shape[2]):
            raise ConfigurationError(
                f"inconsistent channel shapes h_d{h_d.shape} H{H.shape} G{G.shape}"
            )
        if not (np.all(np.isfinite(h_d)) and np.all(np.isfinite(H)) and np.all(np.isfinite(G))):
            raise ConfigurationError("channel estimates must be finite")
        object.__setattr__(self, "h_d", h_d)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "G", G)

    @property
    def shape(self) -> tuple[int, int, int]:
        """(M, N, K)."""
        K, M, N = self.H.shape
        return M, N, K

    def check(self, cfg: SystemConfig) -> None:
        if self.shape != (cfg.M, cfg.N, cfg.K):
            raise ConfigurationError(
                f"channels have (M,N,K)={self.shape}, config expects {(cfg.M, cfg.N, cfg.K)}"
            )


@dataclass(frozen=True)
class RisState:
    a: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        a = _frozen(self.a, float).reshape(-1)
        theta = _frozen(self.theta, float).reshape(-1)
        if a.shape != theta.shape:
            raise ConfigurationError("gain and phase vectors differ in length")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "theta", theta)

    @property
    def phi(self) -> np.ndarray:
        """Complex element responses a_n exp(j theta_n)."""
        return self.a * np.exp(1j * self.theta)

    def is_feasible(self, a_max: float) -> bool:
        return bool(
            np.all(self.a >= 0) and np.all(self.a <= a_max)
            and np.all(self.theta >= 0) and np.all(self.theta < 2 * np.pi)
        )


@dataclass(frozen=True)
class ResourceState:
    p: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        p = _frozen(self.p, float).reshape(-1)
        W = _frozen(self.W, complex)
        if W.ndim != 2 or W.shape[1] != p.shape[0]:
            raise ConfigurationError(f"W must be (M, K) with K={p.shape[0]}, got {W.shape}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "W", W)

    def is_feasible(self, p_max: float) -> bool:
        return bool(np.all(self.p >= 0) and np.all(self.p <= p_max))


@dataclass(frozen=True)
class SinrBreakdown:
    """Per-user terms of the SINR; fields are (K,) arrays or scalars for one user."""

    signal: np.ndarray
    interference: np.ndarray
    ris_noise: np.ndarray
    csi_error: np.ndarray
    rx_noise: np.ndarray
    psi: np.ndarray = field(init=False)
    gamma: np.ndarray = field(init=False)

    def __post_init__(self):
        psi = self.ris_noise + self.csi_error + self.rx_noise
        denom = self.interference + psi
        with np.errstate(divide="ignore", invalid="ignore"):
            gamma = np.where(denom > 0, self.signal / np.where(denom > 0, denom, 1.0), 0.0)
        if np.ndim(gamma) == 0:
            gamma = float(gamma)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "gamma", gamma)

    def user(self, k: int) -> "SinrBreakdown":
        return SinrBreakdown(
            signal=float(self.signal[k]),
            interference=float(self.interference[k]),
            ris_noise=float(self.ris_noise[k]),
            csi_error=float(self.csi_error[k]),
            rx_noise=float(self.rx_noise[k]),
        )


@dataclass(frozen=True)
class BlockOutcome:
    """Result of one sub-problem solver: new state plus loop telemetry."""

    state: Union[ResourceState, RisState]
    loops: int
    converged: bool
    trace: tuple[float, ...] = ()
    warnings: tuple[str, ...] = ()


def _check(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState, ris: RisState) -> None:
    est.check(cfg)
    if res.W.shape != (cfg.M, cfg.K):
        raise ConfigurationError(f"W has shape {res.W.shape}, expected {(cfg.M, cfg.K)}")
    if ris.a.shape != (cfg.N,):
        raise ConfigurationError(f"RIS state has {ris.a.shape[0]} elements, expected {cfg.N}")


def combined_channels(est: ChannelEstimates, ris: RisState) -> np.ndarray:
    """All combined estimates h_d,k + H_k phi as a (K, M) array."""
    if ris.a.shape[0] != est.H.shape[2]:
        raise ConfigurationError("RIS state length does not match channel element count")
    return est.h_d + est.H @ ris.phi


def combined_channel(est: ChannelEstimates, ris: RisState, k: int) -> np.ndarray:
    K = est.h_d.shape[0]
    if not 0 <= k < K:
        raise ConfigurationError(f"user index {k} out of range for K={K}")
    if ris.a.shape[0] != est.H.shape[2]:
        raise ConfigurationError("RIS state length does not match channel element count")
    return est.h_d[k] + est.H[k] @ ris.phi


@dataclass(frozen=True)
class _Terms:
    """Intermediate quantities shared by SINR, rates and gradients."""

    h: np.ndarray  # (K, M) combined channels
    S: np.ndarray  # (K, K) S[k, i] = w_k^H h_i
    A: np.ndarray  # |S|^2
    wn2: np.ndarray  # (K,) ||w_k||^2
    gw2: np.ndarray  # (K, N) |(G^H w_k)_n|^2
    phi: np.ndarray
    phi_n2: float
    ris_noise: np.ndarray
    csi_error: np.ndarray
    rx_noise: np.ndarray
    err_coef: np.ndarray  # (K,) sigma_d,u^2 + sigma_r,u^2 ||phi||^2

    @property
    def psi(self) -> np.ndarray:
        return self.ris_noise + self.csi_error + self.rx_noise


def _terms(cfg: SystemConfig, est: ChannelEstimates, W: np.ndarray, p: np.ndarray,
           a: np.ndarray, theta: np.ndarray) -> _Terms:
    phi = a * np.exp(1j * theta)
    h = est.h_d + est.H @ phi
    S = W.conj().T @ h.T
    A = S.real**2 + S.imag**2
    wn2 = np.einsum("mk,mk->k", W.conj(), W).real
    GhW = est.G.conj().T @ W  # (N, K)
    gw2 = (GhW.real**2 + GhW.imag**2).T
    phi_n2 = float(np.dot(a, a))
    ris_noise = cfg.sigma_n_sq * (gw2 @ (a * a))
    err_coef = cfg.sigma_d + cfg.sigma_r * phi_n2
    csi_error = wn2 * (np.dot(p, err_coef) + cfg.sigma_G_sq * cfg.sigma_n_sq * phi_n2)
    rx_noise = cfg.sigma_0_sq * wn2
    return _Terms(h, S, A, wn2, gw2, phi, phi_n2, ris_noise, csi_error, rx_noise, err_coef)


def _offdiag(A: np.ndarray) -> np.ndarray:
    out = A.copy()
    np.fill_diagonal(out, 0.0)
    return out


def _gamma(t: _Terms, p: np.ndarray) -> np.ndarray:
    signal = p * np.diag(t.A)
    interf = _offdiag(t.A) @ p + t.psi
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(interf > 0, signal / np.where(interf > 0, interf, 1.0), 0.0)


def _rate_nat(cfg: SystemConfig, est: ChannelEstimates, W: np.ndarray, p: np.ndarray,
              a: np.ndarray, theta: np.ndarray) -> float:
    return float(np.sum(np.log1p(_gamma(_terms(cfg, est, W, p, a, theta), p))))


def sinr_breakdown(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState, ris: RisState) -> SinrBreakdown:
    """SINR terms for every user at once."""
    _check(cfg, est, res, ris)
    t = _terms(cfg, est, res.W, res.p, ris.a, ris.theta)
    signal = res.p * np.diag(t.A)
    interference = _offdiag(t.A) @ res.p
    return SinrBreakdown(signal, interference, t.ris_noise, t.csi_error, t.rx_noise)


def sinr(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState, ris: RisState, k: int) -> SinrBreakdown:
    """SINR terms for user ``k``, returned as scalars."""
    if not 0 <= k < cfg.K:
        raise ConfigurationError(f"user index {k} out of range for K={cfg.K}")
    return sinr_breakdown(cfg, est, res, ris).user(k)


def sum_rate(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState, ris: RisState) -> float:
    """Uplink sum-rate in bit/s/Hz."""
    return float(np.sum(np.log2(1.0 + sinr_breakdown(cfg, est, res, ris).gamma)))


def sum_rate_nat(cfg: SystemConfig, est: ChannelEstimates, res: ResourceState, ris: RisState) -> float:
    """Uplink sum-rate in nats."""
    return float(np.sum(np.log1p(sinr_breakdown(cfg, est, res, ris).gamma)))


def random_beamformers(M: int, K: int, rng: np.random.Generator) -> np.ndarray:
    """Complex Gaussian columns scaled to unit norm."""
    W = (rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))) / np.sqrt(2)
    return W / np.linalg.norm(W, axis=0, keepdims=True)
