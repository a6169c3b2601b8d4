"""Batched Monte Carlo pipelines tying channels, acquisition and alignment together."""
from dataclasses import dataclass

import numpy as np

from .acquisition import OverheadAllocation, acquire_csi_batch, optimal_split
from .channel import sample_channel_arrays
from .config import FadingFrame, LinkBudget, NetworkConfig
from .ia import SolverOptions, solve_ia_batch
from .overhead import alpha_star_numeric

__all__ = [
    "GainSample",
    "EffectiveRateSample",
    "ErrorVarianceSample",
    "simulate_ia_gains",
    "simulate_error_variance",
    "simulate_effective_rate",
]


@dataclass
class GainSample:
    gains: np.ndarray  # (n_converged, K, d) effective direct gains
    leakage: np.ndarray  # (n_converged,)
    converged_fraction: float
    trials: int


@dataclass
class ErrorVarianceSample:
    error_variance: float  # empirical per-entry variance of H - Hhat
    column_covariance: np.ndarray  # (Nr, Nr) averaged error-column covariance
    fb_power_ratio: float  # mean trace(X X*) / (tauf * Pf)
    trials: int


@dataclass
class EffectiveRateSample:
    rate_eff: float  # (1 - overhead) * payload sum-rate, bits/s/Hz
    payload_rate: float
    alpha: float
    allocation: OverheadAllocation
    converged_fraction: float
    trials: int


def simulate_ia_gains(cfg: NetworkConfig, trials: int, seed: int,
                      tol: float = 1e-9, max_iter: int = 3000,
                      chunk: int = 25_000) -> GainSample:
    """Solve alignment on independent channel draws and collect direct gains."""
    H, _ = sample_channel_arrays(cfg, trials, seed, feedback=False)
    gains, leaks, n_ok = [], [], 0
    for lo in range(0, trials, chunk):
        part = H[lo:lo + chunk]
        res = solve_ia_batch(part, cfg, SolverOptions(tol=tol, max_iter=max_iter, seed=seed + lo))
        ok = res.converged
        n_ok += int(ok.sum())
        gains.append(res.gains[ok])
        leaks.append(res.leakage[ok])
    return GainSample(
        gains=np.concatenate(gains),
        leakage=np.concatenate(leaks),
        converged_fraction=n_ok / trials,
        trials=trials,
    )


def simulate_error_variance(cfg: NetworkConfig, budget: LinkBudget, alloc: OverheadAllocation,
                            trials: int, seed: int, estimator: str = "zf",
                            despreader: str = "mmse",
                            noise_scales=(1.0, 1.0, 1.0)) -> ErrorVarianceSample:
    """Empirical statistics of the acquisition error over many draws."""
    H, G = sample_channel_arrays(cfg, trials, seed)
    Hh, diag = acquire_csi_batch(H, G, cfg, budget, alloc, seed + 1,
                                 estimator=estimator, despreader=despreader,
                                 noise_scales=noise_scales)
    err = H - Hh
    # error columns live in the receive space: covariance over (trial, i, k, column)
    cols = err.transpose(0, 1, 2, 4, 3).reshape(-1, cfg.Nr)
    cov = cols[..., :, None] * cols.conj()[..., None, :]
    return ErrorVarianceSample(
        error_variance=float(np.mean(np.abs(err) ** 2)),
        column_covariance=cov.mean(axis=0),
        fb_power_ratio=float(np.mean(diag["fb_power"]) / (alloc.tauf * budget.Pf)),
        trials=trials,
    )


def simulate_effective_rate(cfg: NetworkConfig, budget: LinkBudget, frame: FadingFrame,
                            trials: int, seed: int, alpha: float | None = None,
                            estimator: str = "mmse", tol: float = 1e-9,
                            max_iter: int = 2000) -> EffectiveRateSample:
    """Full link simulation: train, feed back, align on estimates, decode.

    Per trial the desired-signal power uses the estimated effective gain
    (that is what the receiver can track), while every CSI-error leakage
    term, the desired stream's own included, is charged as additional
    Gaussian noise. Non-converged alignment draws are dropped.
    """
    if alpha is None:
        design = alpha_star_numeric(cfg, budget, frame)
        alpha, alloc = design.alphaStar, design.allocation
    else:
        alloc, _ = optimal_split(cfg, budget, alpha * frame.Tframe)
    H, G = sample_channel_arrays(cfg, trials, seed)
    Hh, _ = acquire_csi_batch(H, G, cfg, budget, alloc, seed + 1, estimator=estimator)
    res = solve_ia_batch(Hh, cfg, SolverOptions(tol=tol, max_iter=max_iter, seed=seed + 2))
    ok = res.converged
    Herr = (H - Hh)[ok]
    p_stream = budget.P / cfg.d
    leak = np.einsum("birm,bikrt,bktl->bimkl", res.W[ok].conj(), Herr, res.F[ok])
    leak_power = p_stream * np.sum(np.abs(leak) ** 2, axis=(3, 4))  # (n, K, d)
    signal = p_stream * np.abs(res.gains[ok]) ** 2
    sinr = signal / (leak_power + budget.sigma2)
    payload = float(np.mean(np.sum(np.log2(1.0 + sinr), axis=(1, 2))))
    overhead = alloc.total / frame.Tframe
    return EffectiveRateSample(
        rate_eff=(1.0 - overhead) * payload,
        payload_rate=payload,
        alpha=alpha,
        allocation=alloc,
        converged_fraction=float(ok.mean()),
        trials=trials,
    )
