"""Overhead-fraction optimization for the effective sum-rate.

The effective rate discounts the aligned sum-rate by the share of the
coherence block spent acquiring CSI: (1 - alpha) * Rsum(rho_eff(alpha)).
Small alpha starves the estimator, large alpha starves the payload; the
optimum is found either by bracketed scalar search on the exact objective or
from a small-Doppler series expansion whose leading term scales as
sqrt(fd).
"""
import math
from dataclasses import dataclass

import numpy as np

from .acquisition import alpha_min, min_error_variance, optimal_split
from .config import FadingFrame, LinkBudget, NetworkConfig
from .errors import InfeasibleConfigError
from .rates import avg_sum_rate, avg_sum_rate_imperfect, effective_sinr, rate_derivatives

__all__ = [
    "OverheadDesign",
    "beta_factor",
    "effective_rate",
    "expansion_effective_rate",
    "alpha_star_expansion",
    "alpha_star_numeric",
    "effective_dof",
    "golden_section_max",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass
class OverheadDesign:
    """An operating point: overhead fraction, integer split, achieved rate."""

    alphaStar: float
    allocation: object  # OverheadAllocation
    ReffStar: float
    beta: float
    clamped: bool


def golden_section_max(f, lo: float, hi: float, xtol: float = 1e-6) -> float:
    """Argmax of a unimodal scalar function on [lo, hi]."""
    a, b = (lo, hi) if lo <= hi else (hi, lo)
    h = b - a
    if h <= xtol:
        return 0.5 * (a + b)
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    yc, yd = f(c), f(d)
    while h > xtol:
        if yc > yd:
            b, d, yd = d, c, yc
            h = _INVPHI * h
            c = a + _INVPHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h = _INVPHI * h
            d = a + _INVPHI * h
            yd = f(d)
    return 0.5 * (a + b)


def beta_factor(cfg: NetworkConfig, budget: LinkBudget) -> float:
    """Doppler sensitivity of the optimally-split CSI error variance."""
    K, Nt, Nr, g = cfg.K, cfg.Nt, cfg.Nr, budget.gamma
    if K * Nt <= Nr:
        raise InfeasibleConfigError(f"needs K*Nt > Nr, got {K * Nt} <= {Nr}")
    mu = math.sqrt(K * Nt * Nr) + Nr + math.sqrt(g * Nt * (K * Nt - Nr))
    return mu**2 / (g * (K * Nt - Nr))


def effective_rate(cfg: NetworkConfig, budget: LinkBudget, frame: FadingFrame, alpha: float) -> float:
    """Exact effective sum-rate at overhead fraction alpha.

    Uses the continuous-relaxation optimal split for the CSI error variance;
    the variance is capped at 1 (an estimate can always be discarded).
    """
    amin = alpha_min(cfg, frame.Tframe)
    if not amin <= alpha <= 1.0:
        raise InfeasibleConfigError(f"alpha={alpha} outside the feasible range [{amin:.4g}, 1]")
    sigma2 = min(min_error_variance(cfg, budget, alpha * frame.Tframe), 1.0)
    rho_eff = effective_sinr(cfg, budget.rho(cfg.d), sigma2)
    return (1.0 - alpha) * avg_sum_rate_imperfect(cfg, rho_eff)


def expansion_effective_rate(cfg: NetworkConfig, budget: LinkBudget, frame: FadingFrame,
                             alpha: float, order: int = 2) -> float:
    """Series form of the effective rate in the Doppler spread, up to fd^order."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if order not in (0, 1, 2):
        raise ValueError("expansion order must be 0, 1 or 2")
    rho = budget.rho(cfg.d)
    Kd = cfg.K * cfg.d
    rate = avg_sum_rate(cfg, rho)
    beta = beta_factor(cfg, budget)
    d1, d2 = rate_derivatives(cfg, rho)
    c = 1.0 + rho * Kd
    terms = rate / c
    if order >= 1:
        terms -= (2.0 * beta / (cfg.d * alpha)) * d1 * frame.fd
    if order >= 2:
        terms += ((2.0 * beta / (cfg.d * alpha)) ** 2 * (d2 * c + 2.0 * Kd * d1) * frame.fd**2 / 2.0)
    return (1.0 - alpha) * c * terms


def _expansion_alpha(cfg, budget, rho, fd):
    rate = avg_sum_rate(cfg, rho)
    d1, d2 = rate_derivatives(cfg, rho)
    beta = beta_factor(cfg, budget)
    Kd = cfg.K * cfg.d
    c = 1.0 + rho * Kd
    lead = math.sqrt(2.0 * beta * c / cfg.d * (d1 / rate) * fd)
    corr = (beta / cfg.d) * (d2 / d1 * c + 2.0 * Kd) * fd
    return lead - corr, lead, rate, d1, beta, c


def alpha_star_expansion(cfg: NetworkConfig, budget: LinkBudget, frame: FadingFrame) -> OverheadDesign:
    """Closed-form overhead fraction from the small-Doppler expansion.

    Below the orthogonality floor the fraction is clamped to alpha_min and
    the rate is re-evaluated exactly there; otherwise the rate carries the
    matching sqrt(fd) penalty term.
    """
    alpha_raw, _, rate, d1, beta, c = _expansion_alpha(cfg, budget, budget.rho(cfg.d), frame.fd)
    amin = alpha_min(cfg, frame.Tframe)
    alpha = min(max(alpha_raw, amin), 1.0)
    clamped = alpha != alpha_raw
    if clamped:
        reff = effective_rate(cfg, budget, frame, alpha)
    else:
        reff = rate - 2.0 * math.sqrt(2.0 * beta / cfg.d * c * d1 * rate * frame.fd)
    alloc, _ = optimal_split(cfg, budget, alpha * frame.Tframe)
    return OverheadDesign(alphaStar=alpha, allocation=alloc, ReffStar=reff, beta=beta, clamped=clamped)


def alpha_star_numeric(cfg: NetworkConfig, budget: LinkBudget, frame: FadingFrame,
                       xtol: float = 1e-6) -> OverheadDesign:
    """Reference optimizer: golden-section search on the exact effective rate."""
    amin = alpha_min(cfg, frame.Tframe)
    alpha = golden_section_max(lambda a: effective_rate(cfg, budget, frame, a), amin, 1.0, xtol)
    clamped = alpha - amin <= 2.0 * xtol
    if clamped:
        alpha = amin
    alloc, _ = optimal_split(cfg, budget, alpha * frame.Tframe)
    return OverheadDesign(
        alphaStar=alpha,
        allocation=alloc,
        ReffStar=effective_rate(cfg, budget, frame, alpha),
        beta=beta_factor(cfg, budget),
        clamped=clamped,
    )


def effective_dof(cfg: NetworkConfig, frame: FadingFrame, feedback_cost: str = "per_rx_antenna") -> float:
    """Spatial degrees of freedom left after the minimum-overhead discount.

    ``feedback_cost`` picks the feedback-interval accounting inside the
    discount: "per_rx_antenna" charges K^2*Nt*Nr symbols, "flat" charges the
    orthogonality minimum K^2*Nt. Both variants are affine in fd.
    """
    K, Nt, Nr, d = cfg.K, cfg.Nt, cfg.Nr, cfg.d
    if feedback_cost == "per_rx_antenna":
        minimum = K * Nt + K * Nr + K**2 * Nt * Nr
    elif feedback_cost == "flat":
        minimum = K * Nt + K * Nr + K**2 * Nt
    else:
        raise ValueError(f"unknown feedback_cost {feedback_cost!r}")
    return (1.0 - minimum / frame.Tframe) * K * d
