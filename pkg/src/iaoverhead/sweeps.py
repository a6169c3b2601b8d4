"""Experiment harness: parameter sweeps and the self-validation battery.

Sweeps evaluate the closed-form, series-expansion and Monte Carlo pipelines
over a grid and emit CSV with a provenance comment block. Every random
quantity draws from a stream derived from (seed, grid index), so results are
byte-identical across runs and independent of scheduling.
"""
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import acquisition as acq
from .channel import crandn, rng_stream, sample_channels
from .clusters import cluster_size_exhaustive, cluster_size_rule
from .config import FadingFrame, LinkBudget, NetworkConfig
from .overhead import alpha_star_expansion, alpha_star_numeric, beta_factor, effective_rate
from .rates import avg_sum_rate, exp_integral_e1, rate_derivatives, scaled_exp_e1
from .simulate import simulate_effective_rate, simulate_error_variance, simulate_ia_gains

__all__ = ["ExperimentSpec", "CheckResult", "run_sweep", "run_validate", "format_csv", "format_report"]

VERSION = "0.1.0"
SWEEP_KINDS = ("snr", "doppler", "tframe", "gamma", "cluster", "validate")


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything one sweep or validation run needs, in boundary units."""

    kind: str = "snr"
    grid_min: float = 0.0
    grid_max: float = 40.0
    grid_points: int = 9
    grid_scale: str = "linear"  # or "log"
    K: int = 3
    Nt: int = 2
    Nr: int = 2
    d: int = 1
    snr_db: float = 20.0  # fixed operating SNR for non-SNR sweeps
    gamma: float = 1.0
    fd: float = 5e-4  # fixed Doppler for non-Doppler sweeps
    trials: int = 0  # Monte Carlo trials per grid point (0 = analytic only)
    seed: int = 0
    kmax: int = 10
    workers: int = 1
    output: str | None = None

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ValueError(f"unknown sweep kind {self.kind!r}; expected one of {SWEEP_KINDS}")
        if self.kind != "validate":
            if self.grid_points < 1:
                raise ValueError("grid needs at least one point")
            if self.grid_min > self.grid_max:
                raise ValueError("grid_min must not exceed grid_max")
            if self.grid_scale not in ("linear", "log"):
                raise ValueError(f"grid_scale must be 'linear' or 'log', got {self.grid_scale!r}")
            if self.grid_scale == "log" and self.grid_min <= 0:
                raise ValueError("log grids need a positive grid_min")
        if self.trials < 0:
            raise ValueError("trial count must be non-negative")

    @property
    def network(self) -> NetworkConfig:
        return NetworkConfig(K=self.K, Nt=self.Nt, Nr=self.Nr, d=self.d)

    def grid(self) -> np.ndarray:
        if self.grid_points == 1:
            return np.array([self.grid_min], dtype=float)
        if self.grid_scale == "log":
            return np.logspace(math.log10(self.grid_min), math.log10(self.grid_max), self.grid_points)
        return np.linspace(self.grid_min, self.grid_max, self.grid_points)


@dataclass
class SweepResult:
    spec: ExperimentSpec
    columns: list
    rows: list


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""


def _budget(spec: ExperimentSpec, snr_db=None, gamma=None) -> LinkBudget:
    rho = 10.0 ** ((spec.snr_db if snr_db is None else snr_db) / 10.0)
    return LinkBudget.from_snr(rho, d=spec.d, gamma=spec.gamma if gamma is None else gamma)


def _analytic_point(cfg, budget, frame):
    """Genie rate, optimal-split error variance and both overhead designs."""
    num = alpha_star_numeric(cfg, budget, frame)
    exp = alpha_star_expansion(cfg, budget, frame)
    sigma2 = acq.min_error_variance(cfg, budget, num.alphaStar * frame.Tframe)
    return {
        "rate_genie": avg_sum_rate(cfg, budget.rho(cfg.d)),
        "sigma2_opt": sigma2,
        "alpha_num": num.alphaStar,
        "alpha_exp": exp.alphaStar,
        "reff_num": num.ReffStar,
        "reff_exp": effective_rate(cfg, budget, frame, exp.alphaStar),
    }


_ANALYTIC_COLS = [
    "rate_genie:avg_sum_rate",
    "sigma2_opt:min_error_variance",
    "alpha_num:alpha_star_numeric",
    "alpha_exp:alpha_star_expansion",
    "reff_num:effective_rate",
    "reff_exp:effective_rate",
]


def _point_snr(spec, idx, snr_db):
    cfg, frame = spec.network, FadingFrame(fd=spec.fd)
    budget = _budget(spec, snr_db=snr_db)
    vals = _analytic_point(cfg, budget, frame)
    row = [snr_db, budget.rho(spec.d)] + [vals[c.split(":")[0]] for c in _ANALYTIC_COLS]
    if spec.trials > 0:
        sim = simulate_effective_rate(cfg, budget, frame, spec.trials, _point_seed(spec.seed, idx))
        row.append(sim.rate_eff)
    return row


def _point_doppler(spec, idx, fd):
    cfg, frame = spec.network, FadingFrame(fd=fd)
    budget = _budget(spec)
    vals = _analytic_point(cfg, budget, frame)
    row = [fd, frame.Tframe] + [vals[c.split(":")[0]] for c in _ANALYTIC_COLS]
    if spec.trials > 0:
        sim = simulate_effective_rate(cfg, budget, frame, spec.trials, _point_seed(spec.seed, idx))
        row.append(sim.rate_eff)
    return row


def _point_tframe(spec, idx, tframe):
    cfg, frame = spec.network, FadingFrame(fd=1.0 / (2.0 * tframe))
    budget = _budget(spec)
    vals = _analytic_point(cfg, budget, frame)
    return [
        frame.Tframe, frame.fd,
        vals["alpha_num"], vals["alpha_exp"],
        vals["alpha_num"] * frame.Tframe, vals["alpha_exp"] * frame.Tframe,
        vals["reff_num"], vals["reff_exp"],
    ]


def _point_gamma(spec, idx, gamma):
    cfg, frame = spec.network, FadingFrame(fd=spec.fd)
    budget = _budget(spec, gamma=gamma)
    vals = _analytic_point(cfg, budget, frame)
    return [gamma, vals["alpha_num"], vals["alpha_exp"], vals["reff_num"], vals["reff_exp"]]


def _point_cluster(spec, idx, tframe):
    fd = 1.0 / (2.0 * tframe)
    budget = _budget(spec)
    exh = cluster_size_exhaustive(budget, fd, spec.kmax)
    k_rule = cluster_size_rule(fd, spec.kmax)
    by_k = {k: r for k, _, _, r in exh.perK}
    return [tframe, fd, exh.Kstar, k_rule, by_k[exh.Kstar], by_k[k_rule]]


_POINT_FUNCS = {
    "snr": (_point_snr, ["snr_db", "rho:linear"] + _ANALYTIC_COLS),
    "doppler": (_point_doppler, ["fd", "tframe:1/(2fd)"] + _ANALYTIC_COLS),
    "tframe": (_point_tframe, [
        "tframe", "fd:1/(2T)",
        "alpha_num:alpha_star_numeric", "alpha_exp:alpha_star_expansion",
        "tohd_num:alpha*T", "tohd_exp:alpha*T",
        "reff_num:effective_rate", "reff_exp:effective_rate",
    ]),
    "gamma": (_point_gamma, [
        "gamma", "alpha_num:alpha_star_numeric", "alpha_exp:alpha_star_expansion",
        "reff_num:effective_rate", "reff_exp:effective_rate",
    ]),
    "cluster": (_point_cluster, [
        "tframe", "fd:1/(2T)",
        "kstar_exh:cluster_size_exhaustive", "kstar_rule:cluster_size_rule",
        "reff_exh:effective_rate", "reff_rule:effective_rate",
    ]),
}


def _point_seed(seed: int, idx: int) -> int:
    # distinct, deterministic stream root per grid point
    return int(rng_stream(seed, idx).integers(0, 2**62))


def run_sweep(spec: ExperimentSpec) -> SweepResult:
    """Evaluate the grid; per-point RNG streams make output order-independent."""
    if spec.kind == "validate":
        checks = run_validate(spec)
        rows = [[c.name, int(c.passed), c.measured, c.threshold, c.detail] for c in checks]
        return SweepResult(spec, ["check", "passed", "measured", "threshold", "detail"], rows)
    func, columns = _POINT_FUNCS[spec.kind]
    if spec.kind in ("snr", "doppler") and spec.trials > 0:
        columns = columns + ["reff_mc:simulate_effective_rate"]
    grid = spec.grid()
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(lambda iv: func(spec, iv[0], iv[1]), enumerate(grid)))
    else:
        rows = [func(spec, i, v) for i, v in enumerate(grid)]
    return SweepResult(spec, columns, rows)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def format_csv(result: SweepResult) -> str:
    """CSV text with a provenance comment block; byte-stable for fixed spec."""
    spec = result.spec
    buf = io.StringIO()
    buf.write(f"# iaoverhead sweep v{VERSION}\n")
    for key in ("kind", "grid_min", "grid_max", "grid_points", "grid_scale",
                "K", "Nt", "Nr", "d", "snr_db", "gamma", "fd", "trials", "seed", "kmax"):
        buf.write(f"# {key} = {getattr(spec, key)}\n")
    buf.write(",".join(result.columns) + "\n")
    for row in result.rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def format_report(checks: list) -> str:
    lines = []
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        lines.append(f"[{status}] {c.name}: measured={c.measured:.6g} threshold={c.threshold:.6g} {c.detail}")
    n_fail = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# validation battery
# ---------------------------------------------------------------------------


def _simpson_e1(eta: float, panels: int = 4000) -> float:
    """Independent quadrature of int_1^inf exp(-eta t)/t dt (oracle-grade)."""
    upper = 1.0 + 60.0 / eta
    t = np.linspace(1.0, upper, 2 * panels + 1)
    y = np.exp(-eta * t) / t
    h = (upper - 1.0) / (2 * panels)
    return float(h / 3.0 * (y[0] + y[-1] + 4.0 * y[1::2].sum() + 2.0 * y[2:-1:2].sum()))


def _check(name, measured, threshold, detail="", larger_is_fail=True):
    passed = measured <= threshold if larger_is_fail else measured >= threshold
    return CheckResult(name, bool(passed), float(measured), float(threshold), detail)


def run_validate(spec: ExperimentSpec) -> list:
    """Cross-check every analytic formula against its independent oracle.

    Trial counts scale from ``spec.trials`` (0 picks the reference counts).
    Returns one CheckResult per property; the CLI maps failures to a nonzero
    exit status.
    """
    trials = spec.trials if spec.trials > 0 else 100_000
    seed = spec.seed
    cfg = NetworkConfig(K=3, Nt=2, Nr=2, d=1)
    checks = []

    # channel generator moments and independence
    rng = rng_stream(seed, 1001)
    n = 100_000
    h = crandn(rng, n)
    g = crandn(rng, n)
    checks.append(_check("channel_entry_variance", abs(np.mean(np.abs(h) ** 2) - 1.0), 0.02,
                         "per-entry variance error at 1e5 samples"))
    corr = abs(np.mean(h * g.conj()))
    checks.append(_check("channel_fw_fb_independence", corr, 0.01,
                         "forward/feedback sample correlation"))
    a = sample_channels(cfg, seed)
    b = sample_channels(cfg, seed)
    identical = np.array_equal(a.H, b.H) and np.array_equal(a.G, b.G)
    checks.append(_check("channel_determinism", 0.0 if identical else 1.0, 0.0,
                         "same seed must give identical draws"))

    # alignment gain statistics and the closed-form rate
    sample = simulate_ia_gains(cfg, trials, seed + 1, tol=1e-9)
    flat = sample.gains.reshape(-1)
    mean_err = max(abs(flat.real.mean()), abs(flat.imag.mean()))
    var_err = abs(np.var(flat) - 1.0)
    sk = max(abs(_skew(flat.real)), abs(_skew(flat.imag)))
    checks.append(_check("gain_mean", mean_err, 0.01, f"{sample.trials} trials"))
    checks.append(_check("gain_variance", var_err, 0.03))
    checks.append(_check("gain_skewness", sk, 0.05))
    worst = 0.0
    for rho in (1.0, 10.0, 100.0):
        mc = float(np.mean(np.sum(np.log2(1.0 + rho * np.abs(sample.gains) ** 2), axis=(1, 2))))
        ref = avg_sum_rate(cfg, rho)
        worst = max(worst, abs(mc - ref) / ref)
    checks.append(_check("sumrate_mc_match", worst, 0.01, "closed form vs gain Monte Carlo"))

    # derivative identities against central differences
    worst1 = worst2 = 0.0
    for rho in (1.0, 10.0, 100.0):
        d1, d2 = rate_derivatives(cfg, rho)
        h1 = 1e-4 * rho
        fd1 = (avg_sum_rate(cfg, rho + h1) - avg_sum_rate(cfg, rho - h1)) / (2 * h1)
        fd2 = (avg_sum_rate(cfg, rho + h1) - 2 * avg_sum_rate(cfg, rho) + avg_sum_rate(cfg, rho - h1)) / h1**2
        worst1 = max(worst1, abs(d1 - fd1))
        worst2 = max(worst2, abs(d2 - fd2))
    checks.append(_check("rate_derivative_1", worst1, 1e-6, "vs central differences"))
    checks.append(_check("rate_derivative_2", worst2, 1e-4))

    # exponential integral against quadrature and its asymptote
    worst = max(abs(exp_integral_e1(x) - _simpson_e1(x)) / _simpson_e1(x) for x in (0.5, 1.0, 2.0, 10.0))
    checks.append(_check("e1_quadrature_match", worst, 1e-7))
    checks.append(_check("e1_asymptote", abs(700.0 * scaled_exp_e1(700.0) - 1.0), 2e-3,
                         "eta*e^eta*E1(eta) -> 1"))

    # acquisition chain against the closed-form error variance
    budget = LinkBudget.from_snr(100.0, d=1, gamma=1.0)
    alloc, _ = acq.optimal_split(cfg, budget, 100.0)
    n_acq = max(trials // 10, 1000)
    zf = simulate_error_variance(cfg, budget, alloc, n_acq, seed + 2, estimator="zf")
    ref = acq.error_variance(cfg, budget, alloc)
    checks.append(_check("csi_error_variance", abs(zf.error_variance - ref) / ref, 0.05,
                         f"analog-feedback chain vs closed form, {n_acq} trials"))
    checks.append(_check("fb_power_constraint", abs(zf.fb_power_ratio - 1.0), 0.01,
                         "feedback transmit power normalization"))
    mmse = simulate_error_variance(cfg, budget, alloc, n_acq, seed + 2, estimator="mmse")
    checks.append(_check("mmse_no_worse_than_zf", mmse.error_variance - zf.error_variance, 0.0,
                         "regularized estimator must not lose"))

    # optimal split beats random feasible allocations of the same budget
    sigma_best = acq.error_variance(cfg, budget, alloc)
    rng = rng_stream(seed, 1002)
    beaten = 0
    mins = np.array([cfg.K * cfg.Nt, cfg.K * cfg.Nr, cfg.K**2 * cfg.Nt])
    spare = alloc.total - mins.sum()
    for _ in range(1000):
        cut = np.sort(rng.integers(0, spare + 1, size=2))
        extra = np.array([cut[0], cut[1] - cut[0], spare - cut[1]])
        cand = acq.OverheadAllocation(*(mins + extra))
        if acq.error_variance(cfg, budget, cand) < sigma_best - 1e-15:
            beaten += 1
    checks.append(_check("split_optimality", beaten, 0.0, "random same-budget allocations that beat it"))

    # expansion vs numeric overhead fraction
    worst_alpha, worst_rate = 0.0, 0.0
    for snr_db in (10.0, 20.0, 30.0):
        for fd in (1e-5, 1e-4, 1e-3):
            b = LinkBudget.from_snr(10.0 ** (snr_db / 10.0), d=1, gamma=1.0)
            frame = FadingFrame(fd=fd)
            num = alpha_star_numeric(cfg, b, frame)
            exp = alpha_star_expansion(cfg, b, frame)
            worst_alpha = max(worst_alpha, abs(exp.alphaStar - num.alphaStar) / num.alphaStar)
            gap = (num.ReffStar - effective_rate(cfg, b, frame, exp.alphaStar)) / num.ReffStar
            worst_rate = max(worst_rate, gap)
    checks.append(_check("expansion_alpha_accuracy", worst_alpha, 0.10,
                         "max |alpha_exp - alpha_num| / alpha_num on the SNR x Doppler grid"))
    checks.append(_check("expansion_rate_accuracy", worst_rate, 0.01,
                         "rate sacrificed by operating at the expansion alpha"))

    # scaling laws
    fds = np.logspace(-6, -4, 9)
    b20 = LinkBudget.from_snr(100.0, d=1, gamma=1.0)
    alphas = [_expansion_alpha_raw(cfg, b20, fd) for fd in fds]
    slope = np.polyfit(np.log(fds), np.log(alphas), 1)[0]
    checks.append(_check("alpha_sqrt_scaling", abs(slope - 0.5), 0.05, "log-log slope vs Doppler"))
    weak = alpha_star_expansion(cfg, LinkBudget(P=100.0, gamma=0.25), FadingFrame(fd=1e-4)).alphaStar
    strong = alpha_star_expansion(cfg, LinkBudget(P=100.0, gamma=1.0), FadingFrame(fd=1e-4)).alphaStar
    checks.append(_check("alpha_grows_with_weak_feedback", strong - weak, 0.0,
                         "alpha* must grow when feedback power drops"))

    # cluster sizing rule against exhaustive search at 35 dB
    b35 = LinkBudget.from_snr(10.0 ** 3.5, d=1, gamma=1.0)
    worst_dk, worst_loss = 0, 0.0
    for t in np.logspace(2, 6, 13):
        fd = 1.0 / (2.0 * t)
        exh = cluster_size_exhaustive(b35, fd, spec.kmax)
        k_rule = cluster_size_rule(fd, spec.kmax)
        by_k = {k: r for k, _, _, r in exh.perK}
        worst_dk = max(worst_dk, abs(exh.Kstar - k_rule))
        if by_k[exh.Kstar] > 0:
            worst_loss = max(worst_loss, (by_k[exh.Kstar] - by_k[k_rule]) / by_k[exh.Kstar])
    checks.append(_check("cluster_rule_agreement", worst_dk, 1.0, "|K*_rule - K*_exhaustive|"))
    checks.append(_check("cluster_rule_rate_loss", worst_loss, 0.02, "rate lost by rule-based sizing"))

    # end-to-end Monte Carlo against the analytic effective rate
    n_e2e = max(trials // 10, 1000)
    frame = FadingFrame(fd=5e-4)
    worst = 0.0
    for i, snr_db in enumerate((10.0, 20.0, 30.0, 40.0)):
        b = LinkBudget.from_snr(10.0 ** (snr_db / 10.0), d=1, gamma=1.0)
        num = alpha_star_numeric(cfg, b, frame)
        sim = simulate_effective_rate(cfg, b, frame, n_e2e, seed + 100 + i, alpha=num.alphaStar)
        worst = max(worst, abs(sim.rate_eff - num.ReffStar) / num.ReffStar)
    checks.append(_check("effective_rate_mc", worst, 0.05,
                         f"full pipeline vs analytic optimum, {n_e2e} trials/point"))
    return checks


def _skew(x: np.ndarray) -> float:
    c = x - x.mean()
    return float(np.mean(c**3) / np.mean(c**2) ** 1.5)


def _expansion_alpha_raw(cfg, budget, fd):
    rate = avg_sum_rate(cfg, budget.rho(cfg.d))
    d1, d2 = rate_derivatives(cfg, budget.rho(cfg.d))
    beta = beta_factor(cfg, budget)
    Kd = cfg.K * cfg.d
    c = 1.0 + budget.rho(cfg.d) * Kd
    return math.sqrt(2.0 * beta * c / cfg.d * (d1 / rate) * fd) - (beta / cfg.d) * (d2 / d1 * c + 2.0 * Kd) * fd
