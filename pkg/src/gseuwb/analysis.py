"""
Closed-form MSE of shrinkage estimators, the GSE lower bound, and brute-force
oracles for checking them.

Notation: ``energies[s]`` is the channel energy inside group s, ``sigma2`` the
per-group equivalent noise level (``v / S`` for an unbiased estimator with
total variance ``v``).
"""
from dataclasses import dataclass

import numpy as np

from .estimators import group_energies, gse_optimal_alpha
from .numerics import GroupPartition


class GridTooLargeError(ValueError):
    """Exhaustive grid requested for too many groups."""


def mse_of_alpha(alpha, energies, sigma2_tilde):
    """MSE ``sigma2 * sum (1 + a_s)^2 + sum a_s^2 h_s`` of the shrunk estimate."""
    alpha = np.asarray(alpha, dtype=float)
    e = np.asarray(energies, dtype=float)
    if alpha.shape[-1] != e.shape[-1]:
        raise ValueError("alpha and energies differ in length")
    return np.sum(sigma2_tilde * (1 + alpha) ** 2 + alpha ** 2 * e, axis=-1)


def mse_lower_bound(v, energies, S):
    """
    Lowest MSE reachable with S optimally chosen shrinkage factors:
    ``v - sum_s v^2 / (S v + h_s S^2)``.
    """
    e = np.asarray(energies, dtype=float)
    if len(e) != S:
        raise ValueError(f"expected {S} group energies, got {len(e)}")
    if v < 0:
        raise ValueError("v must be non-negative")
    den = S * v + e * S ** 2
    safe = np.where(den > 0, den, 1.0)
    return float(v - np.sum(np.where(den > 0, v * v / safe, 0.0)))


def _alpha_grid(step):
    if not 0 < step <= 0.1:
        raise ValueError(f"step must lie in (0, 0.1], got {step}")
    n = int(np.floor(1.0 / step + 1e-9))
    k = np.arange(n, -1, -1)
    grid = -k * step
    return grid[grid > -1.0]


def grid_search_alpha(energies, sigma2_tilde, step=0.005):
    """Exhaustive argmin of :func:`mse_of_alpha` over a uniform grid (S <= 3)."""
    e = np.asarray(energies, dtype=float)
    S = len(e)
    if S > 3:
        raise GridTooLargeError(f"exhaustive grid limited to S <= 3, got S={S}")
    grid = _alpha_grid(step)
    # the cost is a sum of per-group terms, so the full grid is an outer sum
    terms = [sigma2_tilde * (1 + grid) ** 2 + grid ** 2 * e_s for e_s in e]
    total = terms[0]
    for t in terms[1:]:
        total = np.add.outer(total, t)
    idx = np.unravel_index(np.argmin(total), total.shape)
    return grid[np.array(idx, dtype=int)]


def delta_mse_surface(energies, sigma2_tilde, step=0.01):
    """
    MSE difference between the two-group shrunk estimate and the unbiased one
    over shrinkage factors in (0, 1]^2.

    Returns ``(sf, D)`` with ``D[a, b]`` the difference at factors
    ``(sf[a], sf[b])``; ``D`` is exactly zero at (1, 1).
    """
    e = np.asarray(energies, dtype=float)
    if len(e) != 2:
        raise ValueError("surface is defined for S == 2 only")
    n = int(round(1.0 / step))
    sf = np.arange(1, n + 1) * (1.0 / n)
    a = sf - 1.0
    per = [sigma2_tilde * ((1 + a) ** 2 - 1) + a ** 2 * e_s for e_s in e]
    return sf, np.add.outer(per[0], per[1])


def surface_minimum(sf, D):
    """Shrinkage-factor pair at the grid minimum of a surface."""
    i, j = np.unravel_index(np.argmin(D), D.shape)
    return np.array([sf[i], sf[j]])


def check_group_inequality(a):
    """
    ``sum 1/a_s >= S^2 / sum a_s`` for positive ``a``.

    Returns ``(holds, slack)`` with ``slack = lhs - rhs``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or len(a) == 0:
        raise ValueError("need a non-empty vector")
    if np.any(a <= 0):
        raise ValueError("all entries must be positive")
    S = len(a)
    slack = float(np.sum(1.0 / a) - S * S / np.sum(a))
    # relative tolerance for the equality case, where rounding may go either way
    tol = 1e-12 * np.sum(1.0 / a)
    return slack >= -tol, slack


@dataclass
class BoundOrderingReport:
    """Lower bounds along a set of group counts and the orderings between them."""
    group_counts: list
    bounds: dict
    single_group_dominates: bool
    full_split_lowest: bool
    nested_monotone: bool

    @property
    def ok(self):
        return self.single_group_dominates and self.full_split_lowest and self.nested_monotone


def verify_statements(h, v, chain, tol=1e-12):
    """
    Check ``bound(1) >= bound(S) >= bound(L)`` for every S in ``chain`` and
    ``bound(S) >= bound(S')`` whenever S divides S'.

    Every S must divide ``L = len(h)`` so that each partition is uniform
    without padding; 1 and L must both be present.
    """
    taps = h.taps if hasattr(h, "taps") else np.asarray(h)
    L = len(taps)
    chain = sorted(set(int(s) for s in chain))
    if 1 not in chain or L not in chain:
        raise ValueError("chain must contain 1 and L")
    bad = [s for s in chain if L % s]
    if bad:
        raise ValueError(f"group counts {bad} do not divide L={L}")
    bounds = {}
    for S in chain:
        e = group_energies(taps, GroupPartition(L, S))
        bounds[S] = mse_lower_bound(v, e, S)
    b1, bL = bounds[1], bounds[L]
    single = all(bounds[S] <= b1 + tol for S in chain)
    full = all(bL <= bounds[S] + tol for S in chain)
    nested = all(bounds[s2] <= bounds[s1] + tol
                 for s1 in chain for s2 in chain if s2 > s1 and s2 % s1 == 0)
    return BoundOrderingReport(chain, bounds, single, full, nested)


def optimal_mse(energies, sigma2_tilde):
    """MSE at the closed-form optimum."""
    return float(mse_of_alpha(gse_optimal_alpha(energies, sigma2_tilde),
                              energies, sigma2_tilde))
