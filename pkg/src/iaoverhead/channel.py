"""Rayleigh channel generation for the forward and feedback links."""
from dataclasses import dataclass

import numpy as np

from .config import NetworkConfig

__all__ = ["ChannelSet", "sample_channels", "sample_channel_arrays", "crandn", "rng_stream"]


def rng_stream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator derived from (seed, *path).

    Streams for distinct paths are statistically independent, so parallel
    trials seeded by (seed, grid_index, trial_index) reproduce regardless of
    scheduling order.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))


def crandn(rng: np.random.Generator, *shape: int) -> np.ndarray:
    """Circularly-symmetric complex Gaussian entries of unit total variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@dataclass(frozen=True)
class ChannelSet:
    """One block-fading realization of every link in the network.

    ``H[i, k]`` is the Nr x Nt forward channel from transmitter k to
    receiver i; ``G[l, i]`` is the Nt x Nr feedback channel from receiver l
    to transmitter i. Forward and feedback draws are independent.
    """

    H: np.ndarray  # (K, K, Nr, Nt)
    G: np.ndarray  # (K, K, Nt, Nr)


def sample_channel_arrays(cfg: NetworkConfig, trials: int, seed: int, feedback: bool = True):
    """Batched i.i.d. CN(0,1) channel draws, H first then G from one stream.

    Skipping the feedback draw leaves the forward draw unchanged.
    """
    rng = rng_stream(seed)
    H = crandn(rng, trials, cfg.K, cfg.K, cfg.Nr, cfg.Nt)
    G = crandn(rng, trials, cfg.K, cfg.K, cfg.Nt, cfg.Nr) if feedback else None
    return H, G


def sample_channels(cfg: NetworkConfig, rng_seed: int) -> ChannelSet:
    """Single deterministic realization for the given seed."""
    H, G = sample_channel_arrays(cfg, 1, rng_seed)
    return ChannelSet(H=H[0], G=G[0])
