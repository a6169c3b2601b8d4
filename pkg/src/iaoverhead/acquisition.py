"""Three-phase CSI acquisition: forward training, feedback training, analog feedback.

Transmitters learn the forward channels in three steps: (1) they send
orthogonal pilots so receivers can estimate the incoming channels, (2) the
receivers send pilots on the reverse link so transmitters can estimate the
feedback channels, and (3) the receivers retransmit their channel estimates
as unquantized symbols under orthogonal spreading, which the transmitters
jointly unwrap into a common forward-CSI estimate.

The per-entry error variance of the final estimate decomposes into a forward
training term, a feedback-link training term, and a feedback-noise term, and
the total is minimized over the split (taut, taup, tauf) in closed form.
"""
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, crandn, rng_stream
from .config import LinkBudget, NetworkConfig
from .errors import InfeasibleConfigError, PilotLengthError, RankDeficiencyError

__all__ = [
    "OverheadAllocation",
    "TrainingEstimate",
    "CsiEstimate",
    "pilot_bank",
    "forward_training",
    "feedback_training",
    "analog_feedback",
    "error_variance",
    "error_components",
    "min_error_variance",
    "optimal_split_continuous",
    "optimal_split",
    "alpha_min",
    "mu_factor",
    "acquire_csi_batch",
]


@dataclass(frozen=True)
class OverheadAllocation:
    """Integer symbol counts for the three acquisition phases."""

    taut: int
    taup: int
    tauf: int

    @property
    def total(self) -> int:
        return self.taut + self.taup + self.tauf

    def validate(self, cfg: NetworkConfig):
        if self.taut < cfg.K * cfg.Nt:
            raise PilotLengthError(f"taut={self.taut} below the orthogonality minimum {cfg.K * cfg.Nt}")
        if self.taup < cfg.K * cfg.Nr:
            raise PilotLengthError(f"taup={self.taup} below the orthogonality minimum {cfg.K * cfg.Nr}")
        if self.tauf < cfg.K**2 * cfg.Nt:
            raise PilotLengthError(f"tauf={self.tauf} below the orthogonality minimum {cfg.K ** 2 * cfg.Nt}")


@dataclass
class TrainingEstimate:
    """Pilot-phase output: estimates plus their theoretical statistics."""

    estimates: np.ndarray
    error_variance: float
    estimate_variance: float
    tau: int


@dataclass
class CsiEstimate:
    """Transmitter-side forward-channel estimates after analog feedback."""

    Hhat: np.ndarray  # (K, K, Nr, Nt)
    sigma2H: float  # closed-form error variance for the allocation used


def pilot_bank(rows: int, length: int) -> np.ndarray:
    """`rows` orthonormal constant-modulus sequences of the given length.

    DFT rows: exactly orthogonal, and every time sample carries equal power
    so per-symbol transmit power constraints hold with equality.
    """
    if length < rows:
        raise PilotLengthError(f"need at least {rows} symbols for {rows} orthogonal sequences, got {length}")
    n = np.arange(rows)[:, None]
    t = np.arange(length)[None, :]
    return np.exp(-2j * np.pi * n * t / length) / math.sqrt(length)


# ---------------------------------------------------------------------------
# closed-form error statistics and the optimal overhead split
# ---------------------------------------------------------------------------


def error_components(cfg: NetworkConfig, budget: LinkBudget, alloc: OverheadAllocation,
                     feedback_noise_time: str = "tauf"):
    """The three additive terms of the CSI error variance.

    ``feedback_noise_time`` selects which interval scales the feedback-noise
    term; "taup" reproduces a variant of the error expression that is
    inconsistent with the final formula and exists purely as a diagnostic.
    """
    K, Nt, Nr = cfg.K, cfg.Nt, cfg.Nr
    if K * Nt <= Nr:
        raise InfeasibleConfigError(f"feedback estimation needs K*Nt > Nr, got {K * Nt} <= {Nr}")
    alloc.validate(cfg)
    s2, P, g = budget.sigma2, budget.P, budget.gamma
    fb_tau = alloc.tauf if feedback_noise_time == "tauf" else alloc.taup
    forward = Nt * s2 / (alloc.taut * P)
    fb_training = s2 * Nr**2 / (P * (K * Nt - Nr) * g * alloc.taup)
    fb_noise = s2 * K * Nt * Nr / (P * (K * Nt - Nr) * g * fb_tau)
    return forward, fb_training, fb_noise


def error_variance(cfg: NetworkConfig, budget: LinkBudget, alloc: OverheadAllocation,
                   wishart_factor: bool = False) -> float:
    """Per-entry variance of the final transmitter-side CSI error.

    With ``wishart_factor`` the feedback-noise term keeps its finite-SNR
    correction (1 + Nr sigma2 / (taup Pf)); the default drops it, matching
    the high-SNR form used throughout the overhead optimization.
    """
    forward, fb_training, fb_noise = error_components(cfg, budget, alloc)
    if wishart_factor:
        fb_noise *= 1.0 + cfg.Nr * budget.sigma2 / (alloc.taup * budget.Pf)
    return forward + fb_training + fb_noise


def mu_factor(cfg: NetworkConfig, gamma: float) -> float:
    """Normalizer of the closed-form split fractions."""
    K, Nt, Nr = cfg.K, cfg.Nt, cfg.Nr
    return math.sqrt(gamma * Nt * (K * Nt - Nr)) + Nr + math.sqrt(K * Nt * Nr)


def optimal_split_continuous(cfg: NetworkConfig, budget: LinkBudget, budget_symbols: float):
    """KKT split of a real-valued overhead budget across the three phases."""
    K, Nt, Nr = cfg.K, cfg.Nt, cfg.Nr
    mu = mu_factor(cfg, budget.gamma)
    taut = math.sqrt(budget.gamma * Nt * (K * Nt - Nr)) / mu * budget_symbols
    taup = Nr / mu * budget_symbols
    tauf = math.sqrt(K * Nt * Nr) / mu * budget_symbols
    return taut, taup, tauf


def min_error_variance(cfg: NetworkConfig, budget: LinkBudget, budget_symbols: float) -> float:
    """CSI error variance at the continuous-relaxation optimal split."""
    K, Nt, Nr = cfg.K, cfg.Nt, cfg.Nr
    if K * Nt <= Nr:
        raise InfeasibleConfigError(f"feedback estimation needs K*Nt > Nr, got {K * Nt} <= {Nr}")
    if budget_symbols <= 0:
        raise ValueError("overhead budget must be positive")
    mu = mu_factor(cfg, budget.gamma)
    return budget.sigma2 * mu**2 / (budget.gamma * budget.P * (K * Nt - Nr) * budget_symbols)


def _marginal_coeffs(cfg: NetworkConfig, budget: LinkBudget):
    # error variance is c_t/taut + c_p/taup + c_f/tauf
    K, Nt, Nr = cfg.K, cfg.Nt, cfg.Nr
    s2, P, g = budget.sigma2, budget.P, budget.gamma
    return (
        Nt * s2 / P,
        s2 * Nr**2 / (P * (K * Nt - Nr) * g),
        s2 * K * Nt * Nr / (P * (K * Nt - Nr) * g),
    )


def optimal_split(cfg: NetworkConfig, budget: LinkBudget, budget_symbols: float):
    """Best integer allocation of the budget, and the continuous-optimum variance.

    The continuous split is rounded onto the integer simplex and then
    improved by single-symbol exchanges until no transfer helps; for this
    separable convex objective that local optimum is the global one.
    """
    K, Nt, Nr = cfg.K, cfg.Nt, cfg.Nr
    mins = (K * Nt, K * Nr, K * K * Nt)
    total = int(math.floor(budget_symbols))
    if total < sum(mins):
        raise InfeasibleConfigError(
            f"budget of {budget_symbols:.1f} symbols cannot cover the minimum "
            f"allocation {sum(mins)} = K*Nt + K*Nr + K^2*Nt"
        )
    cont = optimal_split_continuous(cfg, budget, budget_symbols)
    coeff = _marginal_coeffs(cfg, budget)
    tau = [max(m, int(round(c))) for m, c in zip(mins, cont)]

    def cost(t):
        return sum(c / x for c, x in zip(coeff, t))

    # restore the exact total, then exchange symbols while it helps
    while sum(tau) > total:
        best = min((i for i in range(3) if tau[i] > mins[i]),
                   key=lambda i: coeff[i] / (tau[i] - 1) - coeff[i] / tau[i])
        tau[best] -= 1
    while sum(tau) < total:
        best = max(range(3), key=lambda i: coeff[i] / tau[i] - coeff[i] / (tau[i] + 1))
        tau[best] += 1
    improved = True
    while improved:
        improved = False
        for i in range(3):
            for j in range(3):
                if i == j or tau[i] <= mins[i]:
                    continue
                trial = list(tau)
                trial[i] -= 1
                trial[j] += 1
                if cost(trial) < cost(tau):
                    tau = trial
                    improved = True
    alloc = OverheadAllocation(*tau)
    alloc.validate(cfg)
    return alloc, min_error_variance(cfg, budget, budget_symbols)


def alpha_min(cfg: NetworkConfig, Tframe: float) -> float:
    """Smallest overhead fraction leaving all three pilot phases orthogonal."""
    need = cfg.K * (cfg.Nt + cfg.Nr + cfg.K * cfg.Nt)
    if Tframe < need:
        raise InfeasibleConfigError(
            f"frame of {Tframe:.1f} symbols is shorter than the minimum "
            f"overhead {need}; no valid allocation exists"
        )
    return need / Tframe


# ---------------------------------------------------------------------------
# simulation of the three phases (batched over channel draws)
# ---------------------------------------------------------------------------


def _training_scales(s: float, sigma2: float, despreader: str):
    # returns (despread gain, estimate variance, shrink = E[est|channel]/channel)
    if despreader == "mmse":
        c = math.sqrt(s) / (sigma2 + s)
        return c, s / (sigma2 + s), s / (sigma2 + s)
    if despreader == "zf":
        c = 1.0 / math.sqrt(s)
        return c, 1.0 + sigma2 / s, 1.0
    raise ValueError(f"unknown despreader {despreader!r}")


def _forward_training_batch(H, cfg, budget, taut, rng, despreader="mmse", noise=1.0):
    B = H.shape[0]
    K, Nt, Nr = cfg.K, cfg.Nt, cfg.Nr
    if taut < K * Nt:
        raise PilotLengthError(f"taut={taut} below the orthogonality minimum {K * Nt}")
    phi = pilot_bank(K * Nt, taut).reshape(K, Nt, taut)
    s = taut * budget.P / Nt
    c, est_var, shrink = _training_scales(s, budget.sigma2, despreader)
    Y = math.sqrt(s) * np.einsum("bikra,kan->birn", H, phi)
    Y += noise * math.sqrt(budget.sigma2) * crandn(rng, B, K, Nr, taut)
    Hr = c * np.einsum("birn,kan->bikra", Y, phi.conj())
    err_var = budget.sigma2 / (budget.sigma2 + s)
    return Hr, err_var, est_var, shrink


def _feedback_training_batch(G, cfg, budget, taup, rng, despreader="mmse", noise=1.0):
    B = G.shape[0]
    K, Nt, Nr = cfg.K, cfg.Nt, cfg.Nr
    if taup < K * Nr:
        raise PilotLengthError(f"taup={taup} below the orthogonality minimum {K * Nr}")
    xi = pilot_bank(K * Nr, taup).reshape(K, Nr, taup)
    s = taup * budget.Pf / Nr
    c, est_var, shrink = _training_scales(s, budget.sigma2, despreader)
    Y = math.sqrt(s) * np.einsum("blita,lan->bitn", G, xi)
    Y += noise * math.sqrt(budget.sigma2) * crandn(rng, B, K, Nt, taup)
    Gh = c * np.einsum("bitn,lan->blita", Y, xi.conj())
    err_var = budget.sigma2 / (budget.sigma2 + s)
    return Gh, err_var, est_var, shrink


def _analog_feedback_batch(Hr, Gh, G, cfg, budget, tauf, rng, estimator, taut, taup,
                           var_Hr, shrink_Hr, noise=1.0):
    B = Hr.shape[0]
    K, Nt, Nr = cfg.K, cfg.Nt, cfg.Nr
    if tauf < K * K * Nt:
        raise PilotLengthError(f"tauf={tauf} below the orthogonality minimum {K * K * Nt}")
    if K * Nt < Nr:
        raise InfeasibleConfigError("joint estimation needs K*Nt >= Nr")
    psi = pilot_bank(K * K * Nt, tauf).reshape(K, K * Nt, tauf)
    Hri = Hr.transpose(0, 1, 3, 2, 4).reshape(B, K, Nr, K * Nt)
    Gi = G.reshape(B, K, K * Nt, Nr)
    Ghi = Gh.reshape(B, K, K * Nt, Nr)
    cfb = math.sqrt(tauf * budget.Pf / (K * Nt * Nr) / var_Hr)
    X = cfb * np.einsum("birj,ijn->birn", Hri, psi)
    fb_power = np.einsum("birn,birn->bi", X, X.conj()).real
    Yf = np.einsum("bltr,blrn->btn", Gi, X)
    Yf += noise * math.sqrt(budget.sigma2) * crandn(rng, B, K * Nt, tauf)
    Z = np.einsum("btn,ijn->bitj", Yf, psi.conj())
    GhG = np.einsum("blts,bltu->blsu", Ghi.conj(), Ghi)
    if estimator == "mmse":
        g1 = Nt * budget.sigma2 / (budget.P * taut)
        g2 = (1.0 + g1) * (
            budget.sigma2 * K * Nt * Nr / (tauf * budget.Pf)
            + Nr * budget.sigma2 / (budget.sigma2 + taup * budget.Pf / Nr)
        )
        A = (1.0 + g1) * GhG + g2 * np.eye(Nr)
    elif estimator == "zf":
        A = GhG
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    try:
        M = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError("estimated feedback Gram matrix is singular") from exc
    scale = 1.0 / (cfb * shrink_Hr)
    Hh_i = scale * np.einsum("blus,blts,bltj->bluj", M, Ghi.conj(), Z)
    Hh = Hh_i.reshape(B, K, Nr, K, Nt).transpose(0, 1, 3, 2, 4)
    return Hh, fb_power


def acquire_csi_batch(H, G, cfg, budget, alloc, seed, estimator="mmse", despreader="mmse",
                      noise_scales=(1.0, 1.0, 1.0)):
    """Run all three phases over a batch of channel draws.

    ``noise_scales`` multiplies the additive noise of each phase (forward
    training, feedback training, analog feedback); zeros isolate individual
    error sources for diagnostics. Returns (Hhat, diagnostics dict).
    """
    alloc.validate(cfg)
    rng = rng_stream(seed)
    Hr, _, _, shr = _forward_training_batch(H, cfg, budget, alloc.taut, rng, despreader, noise_scales[0])
    Gh, _, gvar, _ = _feedback_training_batch(G, cfg, budget, alloc.taup, rng, despreader, noise_scales[1])
    var_Hr = _training_scales(alloc.taut * budget.P / cfg.Nt, budget.sigma2, despreader)[1]
    Hh, fb_power = _analog_feedback_batch(
        Hr, Gh, G, cfg, budget, alloc.tauf, rng, estimator,
        alloc.taut, alloc.taup, var_Hr, shr, noise_scales[2],
    )
    return Hh, {"Hr": Hr, "Gh": Gh, "fb_power": fb_power, "Gh_variance": gvar}


# ---------------------------------------------------------------------------
# single-realization stage operations
# ---------------------------------------------------------------------------


def forward_training(channels: ChannelSet, cfg: NetworkConfig, budget: LinkBudget,
                     taut: int, seed: int) -> TrainingEstimate:
    """Receiver-side MMSE estimates of the forward channels from pilots."""
    rng = rng_stream(seed, 0)
    Hr, err_var, est_var, _ = _forward_training_batch(channels.H[None], cfg, budget, taut, rng)
    return TrainingEstimate(Hr[0], err_var, est_var, taut)


def feedback_training(channels: ChannelSet, cfg: NetworkConfig, budget: LinkBudget,
                      taup: int, seed: int) -> TrainingEstimate:
    """Transmitter-side MMSE estimates of the feedback channels from pilots."""
    rng = rng_stream(seed, 1)
    Gh, err_var, est_var, _ = _feedback_training_batch(channels.G[None], cfg, budget, taup, rng)
    return TrainingEstimate(Gh[0], err_var, est_var, taup)


def analog_feedback(Hhat_r: TrainingEstimate, Ghat: TrainingEstimate, channels: ChannelSet,
                    cfg: NetworkConfig, budget: LinkBudget, tauf: int, seed: int,
                    estimator: str = "mmse") -> CsiEstimate:
    """Spread, transmit and jointly estimate the receiver-side estimates.

    ``estimator`` picks the regularized joint estimator ("mmse") or its
    unregularized simplification ("zf"), whose error variance is the one the
    closed-form overhead analysis tracks.
    """
    rng = rng_stream(seed, 2)
    Hh, _ = _analog_feedback_batch(
        Hhat_r.estimates[None], Ghat.estimates[None], channels.G[None], cfg, budget,
        tauf, rng, estimator, Hhat_r.tau, Ghat.tau,
        Hhat_r.estimate_variance, Hhat_r.estimate_variance,
    )
    alloc = OverheadAllocation(Hhat_r.tau, Ghat.tau, tauf)
    return CsiEstimate(Hhat=Hh[0], sigma2H=error_variance(cfg, budget, alloc))
