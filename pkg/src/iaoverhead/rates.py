"""Closed-form average sum-rate machinery for the aligned network.

Interference alignment with per-stream zero-forcing turns the network into
K*d parallel Rayleigh channels with unit-variance effective gains, so the
average sum-rate has the classical exponential-integral form
``K d log2(e) exp(1/rho) E1(1/rho)``. Everything here is a pure function of
the per-stream SNR.
"""
import math

import numpy as np

from .config import NetworkConfig

__all__ = [
    "exp_integral_e1",
    "scaled_exp_e1",
    "avg_sum_rate",
    "rate_derivatives",
    "effective_sinr",
    "avg_sum_rate_imperfect",
]

LOG2E = math.log2(math.e)
_EULER = 0.57721566490153286060651209008240243

# series/continued-fraction switch point; both converge fast near 1
_SERIES_CUTOFF = 1.0


def _e1_series(eta: float) -> float:
    # E1(x) = -euler - ln x + sum_{n>=1} (-1)^{n+1} x^n / (n n!)
    total = -_EULER - math.log(eta)
    term = 1.0
    for n in range(1, 60):
        term *= -eta / n
        delta = -term / n
        total += delta
        if abs(delta) < 1e-17 * max(abs(total), 1e-30):
            break
    return total


def _e1_cf_scaled(eta: float) -> float:
    # modified Lentz continued fraction for e^x E1(x); good for x >= ~1
    tiny = 1e-300
    b = eta + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 300):
        a = -i * i
        b += 2.0
        d = a * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + a / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h


def exp_integral_e1(eta: float) -> float:
    """Exponential integral E1(eta) = int_1^inf t^-1 exp(-eta t) dt."""
    eta = float(eta)
    if eta <= 0:
        raise ValueError(f"E1 requires a positive argument, got {eta}")
    if eta <= _SERIES_CUTOFF:
        return _e1_series(eta)
    if eta > 700.0:  # exp(-eta) underflows; value is below 1e-306
        return math.exp(-eta + math.log(_e1_cf_scaled(eta))) if eta < 745 else 0.0
    return math.exp(-eta) * _e1_cf_scaled(eta)


def scaled_exp_e1(eta: float) -> float:
    """Overflow-safe product exp(eta) * E1(eta), valid for any eta > 0."""
    eta = float(eta)
    if eta <= 0:
        raise ValueError(f"scaled E1 requires a positive argument, got {eta}")
    if eta <= _SERIES_CUTOFF:
        return math.exp(eta) * _e1_series(eta)
    return _e1_cf_scaled(eta)


def avg_sum_rate(cfg: NetworkConfig, rho: float) -> float:
    """Average sum-rate in bits/s/Hz over the K*d aligned Rayleigh streams."""
    if rho <= 0:
        raise ValueError(f"per-stream SNR must be positive, got {rho}")
    return cfg.K * cfg.d * LOG2E * scaled_exp_e1(1.0 / rho)


def rate_derivatives(cfg: NetworkConfig, rho: float):
    """First and second derivatives of avg_sum_rate w.r.t. rho (closed form)."""
    if rho <= 0:
        raise ValueError(f"per-stream SNR must be positive, got {rho}")
    c = cfg.K * cfg.d * LOG2E
    rate = avg_sum_rate(cfg, rho)
    d1 = (c - rate / rho) / rho
    d2 = -(c + d1 - 2.0 * rate / rho) / rho**2
    return d1, d2


def effective_sinr(cfg: NetworkConfig, rho: float, sigma2H: float) -> float:
    """Post-combining average SINR when CSI carries per-entry error sigma2H.

    Residual misalignment and mismatched decoding act as extra Gaussian
    noise of power K*P*sigma2H, while the useful gain shrinks to 1-sigma2H.
    """
    if not 0.0 <= sigma2H <= 1.0:
        raise ValueError(f"CSI error variance must lie in [0, 1], got {sigma2H}")
    return rho * (1.0 - sigma2H) / (rho * cfg.K * cfg.d * sigma2H + 1.0)


def avg_sum_rate_imperfect(cfg: NetworkConfig, rho_eff: float) -> float:
    """Average sum-rate at the effective SINR; 0 by continuity at rho_eff = 0."""
    if rho_eff < 0:
        raise ValueError(f"effective SINR must be non-negative, got {rho_eff}")
    if rho_eff == 0.0:
        return 0.0
    return avg_sum_rate(cfg, rho_eff)
