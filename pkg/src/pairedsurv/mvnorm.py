"""Multivariate normal orthant probabilities by quasi-Monte Carlo.

Separation-of-variables scheme: after a Cholesky factorization (variables
statically reordered so the most restrictive limit comes first) the CDF
becomes an integral over the unit cube of dimension L-1.  The cube is
sampled with a Richtmyer lattice passed through the tent transform, under
independent random shifts; the spread of the per-shift means gives the
error estimate.  Results are deterministic for a given seed.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import AccuracyNotReached, NotACorrelationMatrix

MAX_DIM = 25
_TINY = 1e-15


def _check_corr(corr):
    c = np.asarray(corr, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise NotACorrelationMatrix("correlation matrix must be square")
    if c.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {c.shape[0]} exceeds the supported {MAX_DIM}")
    if not np.allclose(c, c.T, atol=1e-10):
        raise NotACorrelationMatrix("correlation matrix must be symmetric")
    if not np.allclose(np.diag(c), 1.0, atol=1e-10):
        raise NotACorrelationMatrix("correlation matrix must have unit diagonal")
    if np.any(np.abs(c) > 1 + 1e-10):
        raise NotACorrelationMatrix("correlation entries must lie in [-1, 1]")
    return 0.5 * (c + c.T)


def _cholesky_psd(corr, jitter=1e-10):
    """Lower Cholesky, tolerating semidefinite input via jitter + pivot floor."""
    try:
        return np.linalg.cholesky(corr)
    except np.linalg.LinAlgError:
        pass
    try:
        return np.linalg.cholesky(corr + jitter * np.eye(corr.shape[0]))
    except np.linalg.LinAlgError:
        pass
    # Pivot-floored factorization: non-positive pivots give a zeroed column,
    # i.e. that coordinate is treated as deterministic given its precursors.
    n = corr.shape[0]
    low = np.zeros((n, n))
    for j in range(n):
        pivot = corr[j, j] - low[j, :j] @ low[j, :j]
        if pivot <= 0.0:
            low[j, j] = 0.0
            continue
        low[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            low[j + 1:, j] = (corr[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return low


def _first_primes(count):
    primes, candidate = [], 2
    while len(primes) < count:
        if all(candidate % p for p in primes):
            primes.append(candidate)
        candidate += 1
    return np.array(primes, dtype=float)


def _integrand_means(low, limits, k_values, shifts, lattice):
    """Per-shift sums of the sequential-conditioning integrand.

    ``k_values`` are lattice indices, ``shifts`` has shape (R, dim-1).
    Returns an (R,) array of integrand sums over the given indices.
    """
    n_shift, dim_m1 = shifts.shape
    n_k = k_values.shape[0]
    base = np.multiply.outer(k_values, lattice)              # (n_k, dim-1)
    w = np.mod(base[:, None, :] + shifts[None, :, :], 1.0)   # (n_k, R, dim-1)
    w = np.abs(2.0 * w - 1.0)                                # tent transform
    w = w.reshape(n_k * n_shift, dim_m1)

    e_first = ndtr(limits[0] / low[0, 0]) if low[0, 0] > 0 else float(limits[0] >= 0)
    f = np.full(w.shape[0], e_first)
    e_prev = f.copy()
    y = np.empty((w.shape[0], dim_m1))
    for l in range(1, dim_m1 + 1):
        y[:, l - 1] = ndtri(np.clip(w[:, l - 1] * e_prev, _TINY, 1 - _TINY))
        num = limits[l] - y[:, :l] @ low[l, :l]
        if low[l, l] > 0:
            e_prev = ndtr(num / low[l, l])
        else:
            e_prev = (num >= 0).astype(float)
        f *= e_prev
    return f.reshape(n_k, n_shift).sum(axis=0)


def mvn_cdf_with_error(upper, corr, tol=1e-4, seed=0, max_points=2 ** 16, n_shifts=8):
    """CDF value plus its estimated absolute error (no warning emitted)."""
    upper = np.asarray(upper, dtype=float).reshape(-1)
    corr = _check_corr(corr)
    if upper.shape[0] != corr.shape[0]:
        raise ValueError("limits and correlation matrix disagree on dimension")
    if upper.shape[0] == 1:
        return float(ndtr(upper[0])), 0.0
    if np.any(np.isneginf(upper)):
        return 0.0, 0.0
    if np.allclose(corr, np.eye(corr.shape[0])):
        return float(np.prod(ndtr(upper))), 0.0

    # Most restrictive variable first reduces the integrand's variance.
    order = np.argsort(upper)
    limits = upper[order]
    low = _cholesky_psd(corr[np.ix_(order, order)])

    dim = limits.shape[0]
    lattice = np.sqrt(_first_primes(dim - 1))
    rng = np.random.default_rng(seed)
    shifts = rng.random((n_shifts, dim - 1))

    sums = np.zeros(n_shifts)
    n_done = 0
    block = 128
    while True:
        k_values = np.arange(n_done + 1, n_done + block + 1, dtype=float)
        sums += _integrand_means(low, limits, k_values, shifts, lattice)
        n_done += block
        means = sums / n_done
        err = 3.0 * means.std(ddof=1) / np.sqrt(n_shifts)
        if err <= tol or n_done >= max_points:
            break
        block = n_done  # double the total each round
    return float(np.clip(means.mean(), 0.0, 1.0)), float(err)


def mvn_cdf(upper, corr, tol=1e-4, seed=0, max_points=2 ** 16, n_shifts=8):
    """``Pr(X_1 <= a_1, ..., X_L <= a_L)`` for X ~ N(0, corr).

    Emits an AccuracyNotReached warning when the internal error estimate is
    still above ``tol`` at ``max_points`` lattice points.
    """
    value, err = mvn_cdf_with_error(upper, corr, tol=tol, seed=seed,
                                    max_points=max_points, n_shifts=n_shifts)
    if err > tol:
        warnings.warn(
            f"MVN CDF error estimate {err:.2e} above tolerance {tol:.2e}",
            AccuracyNotReached,
            stacklevel=2,
        )
    return value
