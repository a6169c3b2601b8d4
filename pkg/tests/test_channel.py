import numpy as np
import pytest

from iaoverhead import FadingFrame, LinkBudget, NetworkConfig, make_frame, sample_channels
from iaoverhead.channel import crandn, rng_stream, sample_channel_arrays


def test_frame_length_is_half_inverse_doppler():
    assert make_frame(5e-4).Tframe == 1000.0
    assert make_frame(0.5).Tframe == 1.0
    assert make_frame(5e-4).alpha is None


def test_vehicular_doppler_example():
    # 160 km/h at 2 GHz carrier over a 300 kHz coherence bandwidth
    v, lam, wc = 44.44, 0.15, 3e5
    fd = v / (lam * wc)
    assert fd == pytest.approx(9.876e-4, rel=1e-3)
    assert make_frame(fd).Tframe == pytest.approx(1.0 / (2 * fd))


def test_frame_rejects_bad_doppler():
    with pytest.raises(ValueError):
        make_frame(0.0)
    with pytest.raises(ValueError):
        make_frame(-1e-3)
    with pytest.raises(ValueError):
        FadingFrame(fd=1e-3, alpha=1.5)


def test_overhead_symbols_need_alpha():
    frame = make_frame(1e-3)
    with pytest.raises(ValueError):
        _ = frame.Tohd
    frame.alpha = 0.1
    assert frame.Tohd == pytest.approx(50.0)


def test_sample_shapes(bench_cfg):
    ch = sample_channels(bench_cfg, 42)
    assert ch.H.shape == (3, 3, 2, 2)
    assert ch.G.shape == (3, 3, 2, 2)
    assert ch.H.dtype == complex


def test_same_seed_bit_identical(bench_cfg):
    a = sample_channels(bench_cfg, 42)
    b = sample_channels(bench_cfg, 42)
    assert np.array_equal(a.H, b.H) and np.array_equal(a.G, b.G)
    c = sample_channels(bench_cfg, 43)
    assert not np.array_equal(a.H, c.H)


def test_entry_moments(bench_cfg):
    # 100k entries: per-entry mean -> 0 and variance -> 1 within 2%
    trials = 3000  # 3000 * 36 > 1e5 entries per link direction
    H, G = sample_channel_arrays(bench_cfg, trials, seed=7)
    for X in (H, G):
        assert np.mean(np.abs(X) ** 2) == pytest.approx(1.0, abs=0.02)
        assert abs(X.mean()) < 0.01


def test_forward_feedback_independence(bench_cfg):
    trials = 3000
    H, G = sample_channel_arrays(bench_cfg, trials, seed=11)
    h = H.reshape(trials, -1)
    g = G.reshape(trials, -1)
    corr = np.abs(np.mean(h * g.conj(), axis=0))
    assert corr.max() < 0.05
    assert np.abs(np.mean(h * g.conj())) < 0.01


def test_feedback_flag_preserves_forward_draw(bench_cfg):
    H1, G1 = sample_channel_arrays(bench_cfg, 10, seed=3)
    H2, G2 = sample_channel_arrays(bench_cfg, 10, seed=3, feedback=False)
    assert np.array_equal(H1, H2)
    assert G2 is None and G1 is not None


def test_rng_streams_are_order_free():
    a = rng_stream(0, 5, 2).standard_normal(4)
    b = rng_stream(0, 5, 2).standard_normal(4)
    c = rng_stream(0, 2, 5).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_crandn_unit_variance():
    rng = rng_stream(1)
    z = crandn(rng, 200_000)
    assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=0.01)
    # circular symmetry: real/imag split the variance evenly
    assert np.var(z.real) == pytest.approx(0.5, abs=0.01)


def test_network_config_validation():
    with pytest.raises(ValueError):
        NetworkConfig(K=1, Nt=2, Nr=2)
    with pytest.raises(ValueError):
        NetworkConfig(K=3, Nt=2, Nr=2, d=3)
    with pytest.raises(ValueError):
        NetworkConfig(K=2, Nt=1, Nr=3)  # K*Nt < Nr
    assert NetworkConfig(K=3, Nt=2, Nr=2, d=1).ia_feasible
    assert not NetworkConfig(K=2, Nt=1, Nr=1, d=1).ia_feasible


def test_link_budget():
    b = LinkBudget.from_snr(100.0, d=2, gamma=0.5, sigma2=2.0)
    assert b.P == pytest.approx(400.0)
    assert b.rho(2) == pytest.approx(100.0)
    assert b.Pf == pytest.approx(200.0)
    with pytest.raises(ValueError):
        LinkBudget(P=0.0)
