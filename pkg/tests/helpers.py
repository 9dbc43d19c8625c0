"""Random instance builders shared by the test modules."""

import numpy as np
from activeris.model import ChannelEstimates, ResourceState, RisState, SystemConfig, random_beamformers


def cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_instance(rng, M=3, N=4, K=2, *, p_max=1.0, a_max=2.0, noisy=True, unit_w=False):
    """A small well-scaled instance where every SINR term is of order one."""
    u = (lambda lo, hi, n=None: rng.uniform(lo, hi, n)) if noisy else (lambda lo, hi, n=None: 0.0 if n is None else np.zeros(n))
    cfg = SystemConfig(
        M=M, N=N, K=K, p_max=p_max, a_max=a_max,
        sigma_n_sq=float(u(0.05, 0.5)),
        sigma_0_sq=float(rng.uniform(0.05, 0.5)),
        sigma_d_sq=u(0.01, 0.3, K),
        sigma_r_sq=u(0.01, 0.3, K),
        sigma_G_sq=float(u(0.01, 0.3)),
    )
    est = ChannelEstimates(cn(rng, (K, M)), cn(rng, (K, M, N)), cn(rng, (M, N)))
    W = random_beamformers(M, K, rng) if unit_w else cn(rng, (M, K))
    res = ResourceState(rng.uniform(0.1, 1.0, K) * p_max, W)
    ris = RisState(rng.uniform(0.2, 1.0, N) * a_max, rng.uniform(0, 2 * np.pi, N))
    return cfg, est, res, ris
