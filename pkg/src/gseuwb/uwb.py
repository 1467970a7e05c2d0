"""
Chip-rate DS-UWB SC-FDE block simulator.

The cyclic prefix is modelled implicitly: every block sees the circulant
channel, so the DFT of a received block is the per-bin product of the channel
frequency response and the DFT of the transmitted chips. Pulse shaping is
folded into the discrete taps.

Two views of the same received block are produced:

* structured channel estimation (SCE): ``z = sqrt(M) Delta(i) F_{M,L} h + n_e``
  with ``Delta(i) = diag(F x_1(i))`` built from user 1's known chips;
* frequency-domain receiver: ``b_hat = Y(i) w`` with
  ``Y(i) = F_N^H I_e^H diag(z(i))``.
"""
from dataclasses import dataclass
import math
from pathlib import Path

import numpy as np
import scipy.linalg as la

from .estimators import IllConditionedError
from .numerics import walsh_codes


@dataclass(frozen=True)
class SystemConfig:
    N: int = 32
    Nc: int = 8
    K: int = 1
    L: int = 100
    cp_len_chips: int = 35
    samples_per_chip: int = 3
    snr_db: float = 0.0
    chip_duration: float = 0.375e-9
    seed: int = 0

    def __post_init__(self):
        walsh_codes(self.Nc)  # power-of-two check
        if self.N < 1:
            raise ValueError("N must be positive")
        if not 1 <= self.K <= self.Nc - 1:
            raise ValueError(f"K must lie in [1, {self.Nc - 1}] (code 0 is reserved), got {self.K}")
        if not 1 <= self.L <= self.M:
            raise ValueError(f"channel length must lie in [1, M={self.M}], got {self.L}")
        if self.cp_len_chips * self.samples_per_chip < self.L:
            raise ValueError(
                f"CP of {self.cp_len_chips} chips x {self.samples_per_chip} samples "
                f"is shorter than the {self.L}-tap channel")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def M(self):
        return self.N * self.Nc

    @property
    def symbol_rate(self):
        """Uncoded bit rate in bit/s, CP overhead included."""
        block = (self.M + self.cp_len_chips) * self.chip_duration
        return self.N / block

    def codes(self):
        """Nc x K matrix of user codes (Walsh columns 1..K)."""
        return walsh_codes(self.Nc)[:, 1:self.K + 1].astype(float)

    def noise_variance(self, channel):
        """
        Per-bin noise variance giving the configured SNR for user 1.

        Chips have unit power, so user 1's received power per chip is the
        channel energy.
        """
        energy = float(np.sum(np.abs(channel.taps) ** 2))
        return energy * 10.0 ** (-self.snr_db / 10.0)


@dataclass(frozen=True)
class ChannelRealization:
    taps: np.ndarray
    tap_spacing: float = 0.375e-9

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=complex)
        if taps.ndim != 1 or len(taps) < 1:
            raise ValueError("channel must be a non-empty vector")
        if not np.all(np.isfinite(taps)):
            raise ValueError("channel taps must be finite")
        object.__setattr__(self, "taps", taps)

    @property
    def L(self):
        return len(self.taps)

    @property
    def energy(self):
        return float(np.sum(np.abs(self.taps) ** 2))


@dataclass(frozen=True)
class ExpDecay:
    """Single exponentially decaying power profile, ``rate`` in 1/tap."""
    rate: float = 0.05


@dataclass(frozen=True)
class Cluster:
    """
    Clustered power profile: clusters start at random taps, cluster power
    decays with ``inter_rate`` and rays within a cluster with ``intra_rate``
    (both in 1/tap).
    """
    n_clusters: int = 3
    intra_rate: float = 0.06
    inter_rate: float = 0.025


def power_profile(profile, L, rng):
    """Mean power per tap for a profile (unnormalized)."""
    taps = np.arange(L)
    if isinstance(profile, ExpDecay):
        if not profile.rate >= 0:
            raise ValueError("decay rate must be non-negative")
        p = np.zeros(L)
        p[0] = 1.0
        if np.isfinite(profile.rate):
            p[1:] = np.exp(-profile.rate * taps[1:])
        return p
    if isinstance(profile, Cluster):
        if profile.n_clusters < 1 or profile.intra_rate < 0 or profile.inter_rate < 0:
            raise ValueError(f"invalid cluster profile {profile}")
        starts = np.concatenate([[0], np.sort(rng.integers(0, L, profile.n_clusters - 1))])
        p = np.zeros(L)
        for t0 in starts:
            after = taps >= t0
            p[after] += np.exp(-profile.inter_rate * t0 - profile.intra_rate * (taps[after] - t0))
        return p
    raise ValueError(f"unknown channel profile {profile!r}")


def gen_channel(profile, L=100, rng=None, tap_spacing=0.375e-9):
    """
    Rayleigh taps with the profile's mean power, normalized to unit energy.

    The common phase is rotated so that the first tap is real and
    non-negative.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    rng = np.random.default_rng() if rng is None else rng
    p = power_profile(profile, L, rng)
    g = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) * np.sqrt(p / 2)
    if abs(g[0]) > 0:
        g = g * (np.conj(g[0]) / abs(g[0]))
        g[0] = abs(g[0])
    g = g / np.linalg.norm(g)
    return ChannelRealization(g, tap_spacing)


class ChannelFormatError(ValueError):
    pass


def load_channel(path, tap_spacing=0.375e-9):
    """Read a channel file: one ``real imag`` pair per line, ``#`` comments."""
    taps = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ChannelFormatError(f"{path}:{lineno}: expected 2 fields, got {len(fields)}")
        try:
            re, im = float(fields[0]), float(fields[1])
        except ValueError:
            raise ChannelFormatError(f"{path}:{lineno}: not a number: {line!r}") from None
        if not (math.isfinite(re) and math.isfinite(im)):
            raise ChannelFormatError(f"{path}:{lineno}: non-finite tap")
        taps.append(complex(re, im))
    if not taps:
        raise ChannelFormatError(f"{path}: no taps found")
    return ChannelRealization(np.array(taps), tap_spacing)


def save_channel(path, channel):
    lines = [f"{t.real:.17g} {t.imag:.17g}" for t in channel.taps]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class ScenarioFrame:
    block_index: int
    tx_bits: np.ndarray
    z_freq: np.ndarray
    delta_i: np.ndarray = None
    Y_i: np.ndarray = None


def spread(bits, codes):
    """Chip sequences ``x_k = D_k b_k``: row k is user k's spread block."""
    bits = np.asarray(bits, dtype=float)
    K, N = bits.shape
    return (bits[:, :, None] * codes.T[:, None, :]).reshape(K, N * codes.shape[0])


def _received(cfg, channel, x_sum, rng, sigma2):
    """DFT of one CP-free received block: ``F H x + F n``."""
    M = cfg.M
    if channel.L > M:
        raise ValueError("channel longer than the block")
    z = np.fft.fft(channel.taps, M) * np.fft.fft(x_sum) / np.sqrt(M)
    if sigma2 > 0:
        n = (rng.standard_normal(M) + 1j * rng.standard_normal(M)) * np.sqrt(sigma2 / 2)
        z = z + np.fft.fft(n) / np.sqrt(M)
    return z


def _check_bits(cfg, bits):
    bits = np.asarray(bits)
    if bits.shape != (cfg.K, cfg.N):
        raise ValueError(f"bits must have shape ({cfg.K}, {cfg.N}), got {bits.shape}")
    return bits


def transmit_sce(cfg, ch, bits, rng, sigma2=None, block_index=0):
    """
    One block in the channel-estimation view; user 1's chips are the pilots.

    ``sigma2`` defaults to :meth:`SystemConfig.noise_variance`.
    """
    bits = _check_bits(cfg, bits)
    sigma2 = cfg.noise_variance(ch) if sigma2 is None else sigma2
    x = spread(bits, cfg.codes())
    z = _received(cfg, ch, x.sum(axis=0), rng, sigma2)
    delta = np.fft.fft(x[0]) / np.sqrt(cfg.M)
    return ScenarioFrame(block_index, bits, z, delta_i=delta)


def user_response(cfg, ch, k):
    """Diagonal of ``Lambda_k = F H S_k F^H`` for user index k (0-based)."""
    code = np.zeros(cfg.M)
    code[:cfg.Nc] = cfg.codes()[:, k]
    return np.fft.fft(ch.taps, cfg.M) * np.fft.fft(code)


def received_data_matrix(cfg, z):
    """``Y = F_N^H I_e^H diag(z)``, an N x M matrix."""
    N = cfg.N
    FNH = np.fft.ifft(np.eye(N), axis=0) * np.sqrt(N)
    return np.tile(FNH, (1, cfg.Nc)) * z[None, :]


def transmit_receiver(cfg, ch, bits, rng, sigma2=None, block_index=0):
    """
    One block in the receiver view:
    ``z = sum_k Lambda_k I_e F_N b_k / sqrt(Nc) + F n``.
    """
    bits = _check_bits(cfg, bits)
    sigma2 = cfg.noise_variance(ch) if sigma2 is None else sigma2
    N, M = cfg.N, cfg.M
    z = np.zeros(M, dtype=complex)
    tile = np.arange(M) % N
    for k in range(cfg.K):
        FNb = np.fft.fft(bits[k]) / np.sqrt(N)
        z += user_response(cfg, ch, k) * FNb[tile] / np.sqrt(cfg.Nc)
    if sigma2 > 0:
        n = (rng.standard_normal(M) + 1j * rng.standard_normal(M)) * np.sqrt(sigma2 / 2)
        z += np.fft.fft(n) / np.sqrt(M)
    return ScenarioFrame(block_index, bits, z, Y_i=received_data_matrix(cfg, z))


def mmse_matrix(cfg, ch, sigma2):
    """
    The M x M matrix
    ``V = (sum_k Lambda_k I_e I_e^H Lambda_k^H / Nc + sigma2 I)^{-1} Lambda_1 / sqrt(Nc)``.
    """
    M, N = cfg.M, cfg.N
    same_bin = (np.arange(M)[:, None] % N) == (np.arange(M)[None, :] % N)  # I_e I_e^H
    C = sigma2 * np.eye(M, dtype=complex)
    for k in range(cfg.K):
        lam = user_response(cfg, ch, k)
        C += same_bin * np.outer(lam, lam.conj()) / cfg.Nc
    if np.linalg.cond(C) > 1e12:
        raise IllConditionedError("MMSE covariance is singular")
    lam1 = user_response(cfg, ch, 0)
    return la.solve(C, np.diag(lam1), assume_a="her") / np.sqrt(cfg.Nc)


def mmse_receiver_ideal(cfg, ch, sigma2):
    """
    Equivalent M-tap MMSE filter: entry l is the sum of row l of
    :func:`mmse_matrix`, so that ``V I_e == diag(w_e) I_e``.

    The weight vector applied to ``Y(i)`` is its conjugate.
    """
    return mmse_matrix(cfg, ch, sigma2).sum(axis=1)


def detect(Y_i, w):
    """Soft outputs ``Y w`` and BPSK decisions (``sign(0) := +1``)."""
    Y_i = np.asarray(Y_i)
    w = np.asarray(w)
    if Y_i.shape[1] != len(w):
        raise ValueError(f"Y has {Y_i.shape[1]} columns, w has {len(w)} taps")
    soft = Y_i @ w
    hard = np.where(soft.real >= 0, 1, -1)
    return hard, soft


def normalized_mse(b, soft):
    b = np.asarray(b, dtype=float)
    return float(np.sum(np.abs(b - soft) ** 2) / np.sum(b ** 2))


def sce_normal_equations(delta, z, L):
    """
    ``X^H X`` and ``X^H z`` for ``X = sqrt(M) diag(delta) F_{M,L}`` via FFTs.

    ``X^H X`` is Hermitian Toeplitz with first column
    ``c[k] = sum_a |delta_a|^2 exp(j 2 pi a k / M)``.
    """
    M = len(delta)
    c = np.fft.ifft(np.abs(delta) ** 2) * M
    gram = la.toeplitz(c[:L], c[:L].conj())
    xhz = np.fft.ifft(np.conj(delta) * z)[:L] * M
    return gram, xhz
