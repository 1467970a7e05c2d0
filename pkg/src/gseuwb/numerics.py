"""
Complex linear-algebra primitives shared by the estimators and the simulator.

Everything here is a pure function of its inputs. Matrices are dense numpy
arrays; FFT shortcuts are used internally only where they reproduce the dense
definition exactly (up to rounding).
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la


def dft_matrix(M):
    """Unitary DFT matrix with entry (a, b) = exp(-j 2 pi a b / M) / sqrt(M)."""
    M = int(M)
    if M < 1:
        raise ValueError(f"DFT order must be >= 1, got {M}")
    k = np.arange(M)
    # reduce a*b mod M before scaling so large orders keep full phase accuracy
    phase = np.outer(k, k) % M
    return np.exp(-2j * np.pi * phase / M) / np.sqrt(M)


def partial_dft(M, L):
    """First ``L`` columns of :func:`dft_matrix` (the M x L matrix F_{M,L})."""
    if not 1 <= L <= M:
        raise ValueError(f"need 1 <= L <= M, got L={L}, M={M}")
    return dft_matrix(M)[:, :L]


def walsh_codes(Nc):
    """
    Sylvester-Hadamard matrix of order ``Nc``.

    Column k is the spreading code of user k; ``S.T @ S == Nc * I``.
    """
    Nc = int(Nc)
    if Nc < 1 or Nc & (Nc - 1):
        raise ValueError(f"Walsh code length must be a power of two, got {Nc}")
    S = np.ones((1, 1), dtype=np.int64)
    while S.shape[0] < Nc:
        S = np.block([[S, S], [S, -S]])
    return S


def circulant_from_first_column(v, M):
    """M x M circulant matrix whose first column is ``v`` zero-padded to M."""
    v = np.asarray(v)
    if v.ndim != 1:
        raise ValueError("first column must be a vector")
    if len(v) > M:
        raise ValueError(f"vector of length {len(v)} does not fit in order {M}")
    col = np.zeros(M, dtype=np.result_type(v, np.complex128))
    col[:len(v)] = v
    return la.circulant(col)


def diagonalize_circulant(h, M):
    """
    Eigenvalues of the circulant channel built from ``h``.

    Entry a is sum_l h[l] exp(-j 2 pi a l / M), i.e. the diagonal of
    F @ H @ F^H, equivalently sqrt(M) * F_{M,L} @ h.
    """
    h = np.asarray(h)
    if len(h) > M:
        raise ValueError(f"channel of length {len(h)} exceeds order {M}")
    return np.fft.fft(h, M)


def expansion_matrix(N, Nc):
    """The M x N stacking matrix [I_N, ..., I_N]^T with Nc identity blocks."""
    return np.tile(np.eye(N), (Nc, 1))


@dataclass(frozen=True)
class GroupPartition:
    """
    Uniform split of a length-``raw_len`` vector into ``num_groups`` groups.

    When ``num_groups`` does not divide ``raw_len`` the vector is zero-padded
    at the tail up to the next multiple.
    """
    raw_len: int
    num_groups: int

    def __post_init__(self):
        if self.raw_len < 1:
            raise ValueError(f"raw_len must be positive, got {self.raw_len}")
        if not 1 <= self.num_groups <= self.raw_len:
            raise ValueError(
                f"num_groups must lie in [1, {self.raw_len}], got {self.num_groups}")

    @property
    def padded_len(self):
        return -(-self.raw_len // self.num_groups) * self.num_groups

    @property
    def group_size(self):
        return self.padded_len // self.num_groups

    def pad(self, v):
        v = np.asarray(v)
        if len(v) == self.padded_len:
            return v
        if len(v) != self.raw_len:
            raise ValueError(
                f"expected length {self.raw_len} or {self.padded_len}, got {len(v)}")
        out = np.zeros(self.padded_len, dtype=v.dtype)
        out[:self.raw_len] = v
        return out

    def expand(self, per_group):
        """Repeat one value per group over the group's entries (padded length)."""
        return np.repeat(np.asarray(per_group), self.group_size)


def block_diag_groups(v, p):
    """
    padded_len x S matrix whose column s carries group s of ``v``.

    ``block_diag_groups(v, p) @ (1 + alpha)`` scales group s by ``1 + alpha[s]``.
    """
    v = np.asarray(v)
    if len(v) != p.padded_len:
        raise ValueError(f"expected length {p.padded_len}, got {len(v)}")
    out = np.zeros((p.padded_len, p.num_groups), dtype=v.dtype)
    rows = np.arange(p.padded_len)
    out[rows, rows // p.group_size] = v
    return out
