"""
Least-squares baselines and group-based shrinkage estimators (GSE).

The GSE scales each of S groups of an unbiased (LS/RLS) estimate by its own
factor ``1 + alpha[s]`` with ``-1 < alpha[s] < 0``. The factors are either
computed in closed form from known group energies and noise level, or adapted
block by block with an LMS recursion (``EB`` mode: group energies taken from
the RLS estimate; ``AT`` mode: those energies refined by one extra gradient
step).
"""
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as la

from .numerics import GroupPartition

# projection interval for alpha, keeps every shrinkage factor inside (0, 1)
ALPHA_MIN = -1.0 + 1e-6
ALPHA_MAX = -1e-12

MAX_CONDITION = 1e12


class IllConditionedError(np.linalg.LinAlgError):
    """Raised when a Gram/correlation matrix is singular or too ill-conditioned."""


def _check_gram(G):
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllConditionedError(f"condition number {cond:.3g} exceeds {MAX_CONDITION:.0e}")


def ls_solve(X, y):
    """LS estimate ``(X^H X)^{-1} X^H y``."""
    X = np.asarray(X)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ValueError(f"shape mismatch: X {X.shape}, y {y.shape}")
    if X.shape[0] < X.shape[1]:
        raise ValueError("need at least as many observations as unknowns")
    G = X.conj().T @ X
    _check_gram(G)
    return la.solve(G, X.conj().T @ y, assume_a="her")


def crlb_variance(X, sigma2_noise):
    """Unbiased MSE floor ``tr(sigma^2 (X^H X)^{-1})``."""
    if sigma2_noise < 0:
        raise ValueError("noise variance must be non-negative")
    X = np.asarray(X)
    return gram_crlb(X.conj().T @ X, sigma2_noise)


def gram_crlb(G, sigma2_noise):
    """:func:`crlb_variance` from a precomputed Gram matrix ``X^H X``."""
    _check_gram(G)
    return float(sigma2_noise * np.trace(la.inv(G)).real)


def sce_regression(delta_i, F_ML):
    """
    Regressor ``sqrt(M) * Delta(i) @ F_{M,L}`` of the structured channel estimate.

    ``delta_i`` may be the diagonal matrix or its diagonal vector.
    """
    F_ML = np.asarray(F_ML)
    d = np.asarray(delta_i)
    if d.ndim == 2:
        if d.shape[0] != d.shape[1]:
            raise ValueError("Delta(i) must be square")
        d = np.diag(d)
    M = F_ML.shape[0]
    if len(d) != M:
        raise ValueError(f"Delta(i) has order {len(d)}, F_{{M,L}} has {M} rows")
    return np.sqrt(M) * d[:, None] * F_ML


@dataclass
class RlsState:
    """
    Exponentially weighted RLS with ``corr(0) = delta * I`` and a zero estimate.

    With ``lam == 1`` the estimate after any stream equals the regularized batch
    solution ``(delta I + sum X^H X)^{-1} sum X^H y``.
    """
    estimate: np.ndarray
    corr: np.ndarray
    lam: float = 0.998
    delta: float = 10.0
    block_index: int = 0

    @classmethod
    def initial(cls, n, lam=0.998, delta=10.0):
        if not 0 < lam <= 1:
            raise ValueError(f"forgetting factor must lie in (0, 1], got {lam}")
        if delta <= 0:
            raise ValueError(f"delta must be positive, got {delta}")
        return cls(np.zeros(n, dtype=complex), delta * np.eye(n, dtype=complex),
                   lam, delta, 0)


def rls_update(state, X_i, y_i):
    """One block RLS step with regressor ``X_i`` and observation ``y_i``."""
    X_i = np.asarray(X_i)
    XH = X_i.conj().T
    return rls_update_normal(state, XH @ X_i, XH @ np.asarray(y_i))


def rls_update_normal(state, gram, xhy):
    """
    RLS step from the block's normal-equation terms ``X^H X`` and ``X^H y``.

    ``X^H (y - X w) == xhy - gram @ w``, so the regressor itself is not needed.
    """
    corr = state.lam * state.corr + gram
    try:
        c = la.cho_factor(corr, lower=True, check_finite=False)
    except la.LinAlgError as exc:
        raise IllConditionedError("RLS correlation matrix lost positive definiteness") from exc
    estimate = state.estimate + la.cho_solve(c, xhy - gram @ state.estimate,
                                             check_finite=False)
    return replace(state, estimate=estimate, corr=corr,
                   block_index=state.block_index + 1)


def group_energies(v, p):
    """Per-group energy ``sum_{l in s} |v_l|^2`` over the zero-padded vector."""
    v = p.pad(np.asarray(v))
    return (np.abs(v) ** 2).reshape(p.num_groups, p.group_size).sum(axis=1)


def gse_optimal_alpha(energies, sigma2_tilde):
    """
    Closed-form MSE-optimal ``alpha_s = -sigma2 / (sigma2 + h_s)``.

    Entries where both the noise level and the group energy vanish are 0.
    """
    if sigma2_tilde < 0:
        raise ValueError("sigma2_tilde must be non-negative")
    e = np.asarray(energies, dtype=float)
    den = sigma2_tilde + e
    safe = np.where(den > 0, den, 1.0)
    return np.where(den > 0, -sigma2_tilde / safe, 0.0)


def gse_apply(est, alpha, p):
    """Scale group s of ``est`` by ``1 + alpha[s]``; output keeps the input length."""
    est = np.asarray(est)
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (p.num_groups,):
        raise ValueError(f"alpha must have shape ({p.num_groups},), got {alpha.shape}")
    scaled = p.pad(est) * p.expand(1.0 + alpha)
    return scaled[:len(est)]


def estimate_noise_var(rls_est, running_mean, S):
    """Instantaneous equivalent-noise estimate ``||est - mean||^2 / S``."""
    rls_est = np.asarray(rls_est)
    running_mean = np.asarray(running_mean)
    if rls_est.shape != running_mean.shape:
        raise ValueError("estimate and running mean differ in shape")
    if S < 1:
        raise ValueError("S must be >= 1")
    d = rls_est - running_mean
    return float(np.vdot(d, d).real / S)


def alpha_gradient(alpha, pm, sigma2):
    """Gradient of the shrinkage cost in alpha, with the factor 2 dropped."""
    alpha = np.asarray(alpha, dtype=float)
    return sigma2 * (1.0 + alpha) + np.asarray(pm, dtype=float) * alpha


def energy_gradient(alpha, pm, sigma2):
    """
    Gradient of the expanded shrinkage cost with respect to each group energy.

    Where ``sigma2 + pm_s == 0`` the limit value ``alpha_s**2`` is used.
    """
    alpha = np.asarray(alpha, dtype=float)
    pm = np.asarray(pm, dtype=float)
    den = (sigma2 + pm) ** 2
    ok = den > 0
    safe = np.where(ok, den, 1.0)
    ratio = np.where(ok, sigma2 / safe, 0.0)
    return 2 * sigma2 * (1 + alpha) * ratio + 2 * alpha * pm * ratio + alpha ** 2


@dataclass
class OpCounter:
    """Tally of real/complex multiplications and additions in a GSE update."""
    mults: int = 0
    adds: int = 0

    def add(self, mults=0, adds=0):
        self.mults += mults
        self.adds += adds


@dataclass
class GseState:
    """
    Adaptive shrinkage state for one estimator instance.

    ``block_index`` counts the RLS estimates consumed so far; the running mean
    is their exact cumulative average.
    """
    partition: GroupPartition
    mode: str = "EB"
    mu: float = 0.075
    mu_p: float = 0.05
    alpha: np.ndarray = None
    pm: np.ndarray = None
    running_mean: np.ndarray = None
    sigma2: float = 0.0
    block_index: int = 0
    iterations: int = 1

    def __post_init__(self):
        if self.mode not in ("EB", "AT"):
            raise ValueError(f"mode must be 'EB' or 'AT', got {self.mode!r}")
        if self.mu <= 0 or self.mu_p <= 0:
            raise ValueError("step sizes must be positive")
        S = self.partition.num_groups
        if self.alpha is None:
            self.alpha = np.zeros(S)
        if self.pm is None:
            self.pm = np.zeros(S)
        if self.running_mean is None:
            self.running_mean = np.zeros(self.partition.raw_len, dtype=complex)

    def biased(self, rls_est):
        """Biased estimate ``H_RLS (1_S + alpha)`` with the current factors."""
        return gse_apply(rls_est, self.alpha, self.partition)

    def step(self, rls_est, i=None, counter=None):
        if self.mode == "EB":
            return gse_eb_step(self, rls_est, i, counter)
        return gse_at_step(self, rls_est, i, counter=counter)


def _common_stats(g, rls_est, i, counter):
    """Running mean, noise estimate and EB energies for block ``i``."""
    p = g.partition
    rls_est = np.asarray(rls_est)
    if len(rls_est) != p.raw_len:
        raise ValueError(f"estimate length {len(rls_est)} != {p.raw_len}")
    i = g.block_index + 1 if i is None else int(i)
    if i < 1:
        raise ValueError("block index starts at 1")
    L, S = p.raw_len, p.num_groups
    # running mean via the increment (est - mean) / i
    mean = g.running_mean + (rls_est - g.running_mean) / i
    sigma2 = estimate_noise_var(rls_est, mean, S)
    pm = group_energies(rls_est, p)
    if counter is not None:
        # |d|^2 and |est|^2 per entry, 1/i and 1/S scalings
        counter.add(mults=2 * L + 2, adds=3 * L + S)
    return i, mean, sigma2, pm


def _alpha_update(g, pm, sigma2, counter):
    S = g.partition.num_groups
    grad = alpha_gradient(g.alpha, pm, sigma2)
    alpha = np.clip(g.alpha - g.mu * grad, ALPHA_MIN, ALPHA_MAX)
    if counter is not None:
        # sigma2*(1+a), pm*a, mu*g
        counter.add(mults=3 * S, adds=0)
    return alpha


def gse_eb_step(g, rls_est, i=None, counter=None):
    """Estimator-based update: energies read straight off the RLS estimate."""
    i, mean, sigma2, pm = _common_stats(g, rls_est, i, counter)
    alpha = _alpha_update(g, pm, sigma2, counter)
    return replace(g, alpha=alpha, pm=pm, running_mean=mean, sigma2=sigma2,
                   block_index=i)


def gse_at_step(g, rls_est, i=None, iterations=None, counter=None):
    """
    Automatic-tuning update: refine the EB energies by gradient steps first.

    An entry driven negative falls back to its EB value.
    """
    i, mean, sigma2, pm_eb = _common_stats(g, rls_est, i, counter)
    S = g.partition.num_groups
    pm = pm_eb.copy()
    for _ in range(g.iterations if iterations is None else iterations):
        pm = pm - g.mu_p * energy_gradient(g.alpha, pm, sigma2)
        pm = np.where(pm < 0, pm_eb, pm)
        if counter is not None:
            # s2^2, (s2+p)^2, ratio, 2*s2*(1+a)*r (3), 2*a*p*r (3), a^2, mu_p*g
            counter.add(mults=10 * S, adds=6 * S)
    alpha = _alpha_update(g, pm, sigma2, counter)
    return replace(g, alpha=alpha, pm=pm, running_mean=mean, sigma2=sigma2,
                   block_index=i)
