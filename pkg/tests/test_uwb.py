import numpy as np
import pytest

from gseuwb import uwb
from gseuwb.estimators import IllConditionedError, sce_regression
from gseuwb.numerics import (circulant_from_first_column, dft_matrix, expansion_matrix,
                             partial_dft, walsh_codes)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_channel(rng, L=100):
    return uwb.gen_channel(uwb.ExpDecay(0.05), L, rng)


def bpsk(rng, K, N):
    return rng.choice([-1, 1], size=(K, N))


def test_config_defaults_and_validation():
    cfg = uwb.SystemConfig()
    assert cfg.M == 256 and cfg.K == 1
    assert cfg.symbol_rate == pytest.approx(293e6, rel=2e-3)
    with pytest.raises(ValueError):
        uwb.SystemConfig(K=8)
    with pytest.raises(ValueError):
        uwb.SystemConfig(Nc=6)
    with pytest.raises(ValueError):
        uwb.SystemConfig(cp_len_chips=30)  # 90 samples < 100 taps
    with pytest.raises(ValueError):
        uwb.SystemConfig(seed=-1)


def test_user_codes_skip_all_ones_column():
    cfg = uwb.SystemConfig(K=7)
    np.testing.assert_array_equal(cfg.codes(), walsh_codes(8)[:, 1:])


def test_gen_channel_impulse_limit():
    ch = uwb.gen_channel(uwb.ExpDecay(np.inf), 10, np.random.default_rng(0))
    np.testing.assert_array_equal(ch.taps, np.eye(10)[0])


@pytest.mark.parametrize("profile", [uwb.ExpDecay(0.05), uwb.ExpDecay(0.0), uwb.Cluster(),
                                     uwb.Cluster(1, 0.2, 0.0)])
def test_gen_channel_unit_energy(profile):
    rng = np.random.default_rng(1)
    for _ in range(20):
        ch = uwb.gen_channel(profile, 100, rng)
        assert abs(ch.energy - 1) <= 1e-12
        assert ch.taps[0].imag == 0 and ch.taps[0].real >= 0


def test_gen_channel_deterministic():
    a = uwb.gen_channel(uwb.Cluster(), 100, np.random.default_rng(7))
    b = uwb.gen_channel(uwb.Cluster(), 100, np.random.default_rng(7))
    np.testing.assert_array_equal(a.taps, b.taps)


def test_gen_channel_rejects_bad_profiles():
    rng = np.random.default_rng(0)
    for bad in (uwb.ExpDecay(-1.0), uwb.Cluster(0), uwb.Cluster(2, -0.1), "cm1"):
        with pytest.raises(ValueError):
            uwb.gen_channel(bad, 10, rng)
    with pytest.raises(ValueError):
        uwb.gen_channel(uwb.ExpDecay(), 0, rng)


def test_channel_file_round_trip(tmp_path):
    p = tmp_path / "one.txt"
    p.write_text("# single tap\n1.0 0.0\n")
    np.testing.assert_array_equal(uwb.load_channel(p).taps, [1 + 0j])

    ch = random_channel(np.random.default_rng(2))
    p = tmp_path / "h.txt"
    uwb.save_channel(p, ch)
    loaded = uwb.load_channel(p)
    assert loaded.L == 100
    np.testing.assert_array_equal(loaded.taps, ch.taps)


@pytest.mark.parametrize("text, line", [("1 0\n1 2 3\n", 2), ("# c\n\n1 x\n", 3),
                                        ("nan 0\n", 1)])
def test_channel_file_errors_carry_line_numbers(tmp_path, text, line):
    p = tmp_path / "bad.txt"
    p.write_text(text)
    with pytest.raises(uwb.ChannelFormatError, match=f":{line}:"):
        uwb.load_channel(p)
    p.write_text("# nothing\n")
    with pytest.raises(uwb.ChannelFormatError):
        uwb.load_channel(p)


def test_sce_impulse_noiseless_is_dft_of_pilot():
    cfg = uwb.SystemConfig()
    rng = np.random.default_rng(3)
    bits = bpsk(rng, 1, cfg.N)
    ch = uwb.ChannelRealization(np.eye(cfg.L)[0])
    f = uwb.transmit_sce(cfg, ch, bits, rng, sigma2=0.0)
    x1 = np.kron(bits[0], cfg.codes()[:, 0])
    np.testing.assert_allclose(f.z_freq, dft_matrix(cfg.M) @ x1, atol=1e-12)


def test_sce_two_constructions_agree():
    rng = np.random.default_rng(4)
    cfg = uwb.SystemConfig()
    F = dft_matrix(cfg.M)
    F_ML = partial_dft(cfg.M, cfg.L)
    for _ in range(20):
        ch = random_channel(rng)
        f = uwb.transmit_sce(cfg, ch, bpsk(rng, 1, cfg.N), rng, sigma2=0.0)
        H = circulant_from_first_column(ch.taps, cfg.M)
        x1 = np.kron(f.tx_bits[0], cfg.codes()[:, 0])
        direct = F @ H @ x1
        np.testing.assert_allclose(f.z_freq, direct, atol=1e-10)
        np.testing.assert_allclose(f.delta_i, F @ x1, atol=1e-12)
        np.testing.assert_allclose(sce_regression(f.delta_i, F_ML) @ ch.taps, direct, atol=1e-10)
        # Parseval: unitary F preserves the noiseless received energy
        assert abs(np.vdot(f.z_freq, f.z_freq) - np.vdot(H @ x1, H @ x1)) <= 1e-10


def test_sce_normal_equations_match_dense():
    rng = np.random.default_rng(5)
    cfg = uwb.SystemConfig(K=3)
    ch = random_channel(rng)
    f = uwb.transmit_sce(cfg, ch, bpsk(rng, 3, cfg.N), rng)
    X = sce_regression(f.delta_i, partial_dft(cfg.M, cfg.L))
    G, xhz = uwb.sce_normal_equations(f.delta_i, f.z_freq, cfg.L)
    np.testing.assert_allclose(G, X.conj().T @ X, atol=1e-10)
    np.testing.assert_allclose(xhz, X.conj().T @ f.z_freq, atol=1e-10)


def test_noise_power_per_bin():
    cfg = uwb.SystemConfig(snr_db=3.0)
    rng = np.random.default_rng(6)
    ch = random_channel(rng)
    sigma2 = cfg.noise_variance(ch)
    assert sigma2 == pytest.approx(10 ** -0.3)
    bits = bpsk(rng, 1, cfg.N)
    clean = uwb.transmit_sce(cfg, ch, bits, rng, sigma2=0.0).z_freq
    power = np.mean([np.mean(np.abs(uwb.transmit_sce(cfg, ch, bits, rng).z_freq - clean) ** 2)
                     for _ in range(10_000)])
    assert abs(power / sigma2 - 1) <= 0.05


def test_user_response_is_diagonal_of_triple_product():
    rng = np.random.default_rng(7)
    cfg = uwb.SystemConfig(N=8, Nc=4, K=3, L=20, cp_len_chips=7)
    F = dft_matrix(cfg.M)
    for _ in range(10):
        ch = random_channel(rng, cfg.L)
        H = circulant_from_first_column(ch.taps, cfg.M)
        for k in range(cfg.K):
            Sk = circulant_from_first_column(cfg.codes()[:, k], cfg.M)
            D = F @ H @ Sk @ F.conj().T
            assert np.max(np.abs(D - np.diag(np.diag(D)))) <= 1e-10
            np.testing.assert_allclose(np.diag(D), uwb.user_response(cfg, ch, k), atol=1e-10)


def test_expansion_identity():
    rng = np.random.default_rng(8)
    N, Nc = 32, 8
    F_N, F_M, Ie = dft_matrix(N), dft_matrix(N * Nc), expansion_matrix(N, Nc)
    for _ in range(10):
        b = rng.standard_normal(N)
        b_e = np.zeros(N * Nc)
        b_e[::Nc] = b
        np.testing.assert_allclose(F_M @ b_e, Ie @ F_N @ b / np.sqrt(Nc), atol=1e-12)


def test_receiver_frame_matches_time_domain_model():
    rng = np.random.default_rng(9)
    cfg = uwb.SystemConfig(K=4)
    ch = random_channel(rng)
    bits = bpsk(rng, cfg.K, cfg.N)
    f = uwb.transmit_receiver(cfg, ch, bits, rng, sigma2=0.0)
    x = uwb.spread(bits, cfg.codes()).sum(axis=0)
    H = circulant_from_first_column(ch.taps, cfg.M)
    np.testing.assert_allclose(f.z_freq, dft_matrix(cfg.M) @ H @ x, atol=1e-10)
    F_N, Ie = dft_matrix(cfg.N), expansion_matrix(cfg.N, cfg.Nc)
    np.testing.assert_allclose(f.Y_i, F_N.conj().T @ Ie.T @ np.diag(f.z_freq), atol=1e-12)


def test_mmse_consolidation_identity():
    rng = np.random.default_rng(10)
    Ie = expansion_matrix(32, 8)
    for _ in range(5):
        cfg = uwb.SystemConfig(K=int(rng.integers(1, 8)))
        ch = random_channel(rng)
        V = uwb.mmse_matrix(cfg, ch, rng.uniform(0.05, 2))
        np.testing.assert_allclose(V @ Ie, np.diag(V.sum(axis=1)) @ Ie, atol=1e-10)


def test_mmse_flat_response(monkeypatch):
    cfg = uwb.SystemConfig(N=4, Nc=4, L=4, cp_len_chips=2)
    monkeypatch.setattr(uwb, "user_response", lambda cfg, ch, k: np.ones(cfg.M))
    sigma2 = 0.3
    w = uwb.mmse_receiver_ideal(cfg, None, sigma2)
    Ie = expansion_matrix(cfg.N, cfg.Nc)
    direct = np.linalg.inv(Ie @ Ie.T / cfg.Nc + sigma2 * np.eye(cfg.M)) / np.sqrt(cfg.Nc)
    r = (Ie @ Ie.T).sum(axis=1)
    np.testing.assert_allclose(w, direct.sum(axis=1), atol=1e-12)
    np.testing.assert_allclose(w, (1 / np.sqrt(cfg.Nc)) / (r / cfg.Nc + sigma2), atol=1e-12)


def test_mmse_limits_and_errors():
    rng = np.random.default_rng(11)
    cfg = uwb.SystemConfig(K=2)
    ch = random_channel(rng)
    assert np.max(np.abs(uwb.mmse_receiver_ideal(cfg, ch, 1e12))) < 1e-10
    with pytest.raises(IllConditionedError):
        uwb.mmse_receiver_ideal(cfg, ch, 0.0)


def test_detect_tie_rule_and_shapes():
    Y = np.ones((4, 6), dtype=complex)
    hard, soft = uwb.detect(Y, np.zeros(6))
    np.testing.assert_array_equal(hard, 1)
    np.testing.assert_array_equal(soft, 0)
    with pytest.raises(ValueError):
        uwb.detect(Y, np.zeros(5))


def test_noiseless_impulse_mmse_recovers_bits():
    rng = np.random.default_rng(12)
    cfg = uwb.SystemConfig()
    ch = uwb.ChannelRealization(np.eye(cfg.L)[0])
    w = np.conj(uwb.mmse_receiver_ideal(cfg, ch, 1e-9))
    for _ in range(5):
        bits = bpsk(rng, 1, cfg.N)
        f = uwb.transmit_receiver(cfg, ch, bits, rng, sigma2=0.0)
        hard, soft = uwb.detect(f.Y_i, w)
        np.testing.assert_array_equal(hard, bits[0])
        assert uwb.normalized_mse(bits[0], soft) < 1e-6


def test_noiseless_multiuser_mmse_signs():
    rng = np.random.default_rng(13)
    cfg = uwb.SystemConfig(K=5)
    ch = random_channel(rng)
    w = np.conj(uwb.mmse_receiver_ideal(cfg, ch, 1e-6))
    bits = bpsk(rng, cfg.K, cfg.N)
    hard, _ = uwb.detect(uwb.transmit_receiver(cfg, ch, bits, rng, sigma2=0.0).Y_i, w)
    np.testing.assert_array_equal(hard, bits[0])


def test_ideal_mmse_ber_non_increasing_in_snr():
    snrs = [0, 4, 8, 12, 16]
    errors = np.zeros(len(snrs))
    for t in range(50):
        rng = np.random.default_rng([14, t])
        ch = random_channel(rng)
        bits = bpsk(rng, 1, 32)
        noise_seed = int(rng.integers(2 ** 32))
        for j, snr in enumerate(snrs):
            cfg = uwb.SystemConfig(snr_db=snr)
            w = np.conj(uwb.mmse_receiver_ideal(cfg, ch, cfg.noise_variance(ch)))
            noise = np.random.default_rng(noise_seed)
            for _ in range(4):
                hard, _ = uwb.detect(uwb.transmit_receiver(cfg, ch, bits, noise).Y_i, w)
                errors[j] += np.sum(hard != bits[0])
    assert np.all(np.diff(errors) <= 0), errors


def test_shape_checks():
    cfg = uwb.SystemConfig(K=2)
    rng = np.random.default_rng(15)
    ch = random_channel(rng)
    with pytest.raises(ValueError):
        uwb.transmit_sce(cfg, ch, np.ones((1, cfg.N)), rng)
    with pytest.raises(ValueError):
        uwb.transmit_receiver(cfg, ch, np.ones((2, 3)), rng)
