import numpy as np
import pytest
from scipy.integrate import quad

from iaoverhead import (
    NetworkConfig,
    avg_sum_rate,
    avg_sum_rate_imperfect,
    effective_sinr,
    exp_integral_e1,
    rate_derivatives,
    scaled_exp_e1,
)
from iaoverhead.channel import crandn, rng_stream


def quad_e1(eta):
    """Adaptive-quadrature oracle for the defining integral."""
    val, _ = quad(lambda t: np.exp(-eta * t) / t, 1.0, np.inf, epsabs=1e-15, epsrel=1e-13, limit=500)
    return val


# frozen from the quadrature oracle above
E1_REFERENCE = {
    0.5: 0.5597735947761608,
    1.0: 0.21938393439552062,
    2.0: 0.04890051070806112,
    10.0: 4.156968929685324e-06,
}


@pytest.mark.parametrize("eta", sorted(E1_REFERENCE))
def test_e1_matches_quadrature(eta):
    assert exp_integral_e1(eta) == pytest.approx(quad_e1(eta), rel=1e-9)
    assert exp_integral_e1(eta) == pytest.approx(E1_REFERENCE[eta], rel=1e-10)


def test_e1_spec_values():
    assert exp_integral_e1(1.0) == pytest.approx(0.2193839344, rel=1e-9)
    assert exp_integral_e1(10.0) == pytest.approx(4.15697e-6, rel=1e-5)


def test_e1_series_cf_agree_at_switch():
    # both branches must agree around the switching point
    for eta in (0.9, 0.99, 1.0, 1.01, 1.1):
        assert exp_integral_e1(eta) == pytest.approx(np.exp(-eta) * scaled_exp_e1(eta), rel=1e-12)


def test_e1_asymptote():
    # eta * e^eta * E1(eta) -> 1; at eta = 700 the residual is about 1/eta
    val = 700.0 * scaled_exp_e1(700.0)
    assert abs(val - 1.0) < 2e-3


def test_e1_domain_errors():
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            exp_integral_e1(bad)
        with pytest.raises(ValueError):
            scaled_exp_e1(bad)


def test_scaled_e1_survives_tiny_snr():
    # direct exp(1/rho) would overflow below rho ~ 0.0014
    val = scaled_exp_e1(1.0 / 1e-4)
    assert 0.0 < val < 1e-4
    assert val == pytest.approx(1e-4, rel=2e-4)  # leading term 1/eta


def test_avg_sum_rate_reference(bench_cfg):
    # 3 log2(e) e E1(1), frozen from the quadrature oracle
    assert avg_sum_rate(bench_cfg, 1.0) == pytest.approx(2.5810421468125644, rel=1e-9)
    assert avg_sum_rate(bench_cfg, 10.0) == pytest.approx(8.719544425244417, rel=1e-9)
    assert avg_sum_rate(bench_cfg, 100.0) == pytest.approx(17.652144701050414, rel=1e-9)


def test_avg_sum_rate_vanishes_at_zero_snr(bench_cfg):
    rates = [avg_sum_rate(bench_cfg, rho) for rho in (1e-1, 1e-3, 1e-5, 1e-7)]
    assert all(r > 0 for r in rates)
    assert rates == sorted(rates, reverse=True)
    assert rates[-1] < 1e-5


def test_avg_sum_rate_monte_carlo(bench_cfg):
    # independent oracle: average log2(1 + rho |g|^2) over raw Rayleigh gains
    g = crandn(rng_stream(5), 100_000)
    for rho in (1.0, 10.0, 100.0):
        mc = 3.0 * np.mean(np.log2(1.0 + rho * np.abs(g) ** 2))
        assert avg_sum_rate(bench_cfg, rho) == pytest.approx(mc, rel=5e-3)


@pytest.mark.parametrize("rho", [1.0, 10.0, 100.0])
def test_rate_derivatives_match_finite_differences(bench_cfg, rho):
    d1, d2 = rate_derivatives(bench_cfg, rho)
    h = 1e-4
    fd1 = (avg_sum_rate(bench_cfg, rho + h) - avg_sum_rate(bench_cfg, rho - h)) / (2 * h)
    fd2 = (avg_sum_rate(bench_cfg, rho + h) - 2 * avg_sum_rate(bench_cfg, rho)
           + avg_sum_rate(bench_cfg, rho - h)) / h**2
    assert abs(d1 - fd1) < 1e-6
    assert abs(d2 - fd2) < 1e-4


def test_high_snr_slope(bench_cfg):
    rho = 1e8
    d1, _ = rate_derivatives(bench_cfg, rho)
    assert rho * d1 == pytest.approx(3 * np.log2(np.e), rel=1e-6)


def test_rate_concave_increasing(bench_cfg):
    for rho in np.logspace(-2, 4, 25):
        d1, d2 = rate_derivatives(bench_cfg, rho)
        assert d1 > 0
        assert d2 < 0


def test_effective_sinr(bench_cfg):
    assert effective_sinr(bench_cfg, 7.5, 0.0) == pytest.approx(7.5)
    assert effective_sinr(bench_cfg, 7.5, 1.0) == 0.0
    assert effective_sinr(bench_cfg, 100.0, 0.01) == pytest.approx(24.75)
    with pytest.raises(ValueError):
        effective_sinr(bench_cfg, 1.0, 1.2)
    # strictly decreasing in the error variance
    vals = [effective_sinr(bench_cfg, 50.0, s) for s in np.linspace(0, 1, 11)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_imperfect_rate(bench_cfg):
    assert avg_sum_rate_imperfect(bench_cfg, 5.0) == avg_sum_rate(bench_cfg, 5.0)
    assert avg_sum_rate_imperfect(bench_cfg, 0.0) == 0.0
    assert avg_sum_rate_imperfect(bench_cfg, 5.0) > avg_sum_rate_imperfect(bench_cfg, 2.5)


def test_imperfect_rate_gaussian_leakage_oracle(bench_cfg):
    # simulate the mismatched-decoding channel: true gain variance 1-s, with
    # independent Gaussian leakage of matched total power K P s + noise
    rng = rng_stream(9)
    rho, s = 20.0, 0.02
    n = 200_000
    gains = crandn(rng, n) * np.sqrt(1.0 - s)
    denom = rho * bench_cfg.K * s + 1.0
    mc = 3.0 * np.mean(np.log2(1.0 + rho * np.abs(gains) ** 2 / denom))
    ref = avg_sum_rate_imperfect(bench_cfg, effective_sinr(bench_cfg, rho, s))
    assert ref == pytest.approx(mc, rel=0.01)
