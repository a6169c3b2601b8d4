"""Choosing how many users should cooperate in one alignment cluster.

Single-stream clusters need Nt + Nr = K + 1 antennas per pair, so training
and feedback costs grow cubically with the cluster size while the sum-rate
grows only linearly. The admission rule compares that cubic overhead growth
against the coherence time; the exhaustive selector evaluates the optimized
effective rate for every candidate size.
"""
import math
from dataclasses import dataclass

from .config import FadingFrame, LinkBudget, NetworkConfig
from .errors import InfeasibleConfigError
from .overhead import alpha_star_numeric

__all__ = [
    "ClusterDesign",
    "cluster_antennas",
    "cluster_config",
    "admission_polynomial",
    "admission_rule",
    "cluster_size_rule",
    "cluster_size_exhaustive",
]


@dataclass
class ClusterDesign:
    Kstar: int
    perK: list  # (K, Nt, Nr, optimized effective rate)
    rule: str  # "exhaustive" or "admission-rule"


def cluster_antennas(K: int) -> tuple[int, int]:
    """Antenna split for a K-user single-stream cluster: Nt + Nr = K + 1."""
    Nt = math.ceil((K + 1) / 2)
    return Nt, K + 1 - Nt


def cluster_config(K: int) -> NetworkConfig:
    Nt, Nr = cluster_antennas(K)
    return NetworkConfig(K=K, Nt=Nt, Nr=Nr, d=1)


def admission_polynomial(K: int) -> int:
    """Overhead growth of extending a K-user cluster by one user."""
    return 4 * K**3 + 15 * K**2 + 17 * K + 6


def admission_rule(K: int, fd: float) -> bool:
    """True when a K-user cluster gains from admitting user K+1.

    Derived from the leading (degrees-of-freedom) term of the effective rate
    with the relaxed antenna split Nt = (K+1)/2: admit while the extra
    overhead per block stays below the coherence time.
    """
    if K < 2:
        raise ValueError(f"clusters start at K=2, got {K}")
    if fd <= 0:
        raise ValueError(f"Doppler spread must be positive, got {fd}")
    return admission_polynomial(K) * fd < 1.0


def cluster_size_rule(fd: float, Kmax: int = 10) -> int:
    """Smallest K whose extension the admission rule rejects, capped at Kmax."""
    if Kmax < 2:
        raise ValueError(f"Kmax must be at least 2, got {Kmax}")
    K = 2
    while K < Kmax and admission_rule(K, fd):
        K += 1
    return K


def cluster_size_exhaustive(budget: LinkBudget, fd: float, Kmax: int = 10) -> ClusterDesign:
    """Evaluate every cluster size with its own optimized overhead and pick the best.

    Sizes whose minimum overhead exceeds the whole coherence block score
    zero rate. Ties break toward fewer users.
    """
    if Kmax < 2:
        raise ValueError(f"Kmax must be at least 2, got {Kmax}")
    per_k = []
    for K in range(2, Kmax + 1):
        cfg = cluster_config(K)
        frame = FadingFrame(fd=fd)
        try:
            design = alpha_star_numeric(cfg, budget, frame)
            rate = design.ReffStar
        except InfeasibleConfigError:
            rate = 0.0
        per_k.append((K, cfg.Nt, cfg.Nr, rate))
    best = max(r for _, _, _, r in per_k)
    kstar = min(k for k, _, _, r in per_k if r == best)
    return ClusterDesign(Kstar=kstar, perK=per_k, rule="exhaustive")
