"""Max-type overall test across a grid of analysis times.

The statistic is the maximum of the per-time standardized paired
statistics.  Its randomization p-value comes from the multivariate normal
CDF with the empirical score correlation matrix; for gamma > 1 the
worst-case bound uses per-column worst-case moments and the
absolute-product correlation matrix.  A standardized Prentice-Wilcoxon
column can be appended so the max also covers a whole-period comparison.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateColumn, DegenerateColumnWarning
from .mvnorm import mvn_cdf
from .scores import pair_differences
from .sensitivity import TestResult, _score_test, _tie_tol, check_gamma

PPW_LABEL = "ppw"


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing positive analysis times."""

    taus: np.ndarray

    def __post_init__(self):
        taus = np.asarray(self.taus, dtype=float).reshape(-1)
        if taus.size < 1:
            raise ValueError("a time grid needs at least one tau")
        if np.any(taus <= 0) or np.any(np.diff(taus) <= 0):
            raise ValueError("grid times must be positive and strictly increasing")
        object.__setattr__(self, "taus", taus)

    def __len__(self):
        return self.taus.size

    def __iter__(self):
        return iter(self.taus)


def as_grid(grid) -> TimeGrid:
    if isinstance(grid, TimeGrid):
        return grid
    return TimeGrid(np.asarray(grid, dtype=float))


@dataclass(frozen=True)
class DiffMatrix:
    """Per-pair score differences, one column per analysis time.

    Columns hold event-probability pseudo-differences; when present, the
    trailing PPW column is the Prentice-Wilcoxon difference negated to the
    same orientation, so every column signals a treated survival advantage
    with negative values.  ``sigma[l] = sqrt(sum_i D[i, l]^2)``.
    """

    taus: np.ndarray
    D: np.ndarray
    sigma: np.ndarray
    has_ppw: bool = False

    def __post_init__(self):
        if self.D.shape[1] != self.n_columns:
            raise ValueError("column count must equal len(taus) + has_ppw")
        expected = np.sqrt(np.sum(self.D ** 2, axis=0))
        if not np.allclose(self.sigma, expected, rtol=0, atol=1e-12 * (1 + expected.max(initial=0.0))):
            raise ValueError("sigma must equal the column root-sum-of-squares")

    @property
    def n_columns(self) -> int:
        return self.taus.size + int(self.has_ppw)

    @property
    def n_pairs(self) -> int:
        return self.D.shape[0]

    @property
    def labels(self) -> list:
        out = [float(t) for t in self.taus]
        if self.has_ppw:
            out.append(PPW_LABEL)
        return out


def diff_matrix(sample, grid, include_ppw=False) -> DiffMatrix:
    """Score-difference columns for every grid time (plus optional PPW)."""
    grid = as_grid(grid)
    cols = [pair_differences(sample, "pseudo", tau).d for tau in grid.taus]
    if include_ppw:
        cols.append(-pair_differences(sample, "pw").d)
    D = np.column_stack(cols)
    return DiffMatrix(taus=grid.taus, D=D, sigma=np.sqrt(np.sum(D ** 2, axis=0)),
                      has_ppw=include_ppw)


@dataclass(frozen=True)
class CorrMatrices:
    """Score correlation matrix and its worst-case (absolute-product) version."""

    rho: np.ndarray
    rho_plus: np.ndarray


def correlations(diff, gamma=1.0) -> CorrMatrices:
    """Both correlation matrices from a DiffMatrix (or raw column matrix).

    ``rho`` is the plain normalized Gram matrix of the columns; ``rho_plus``
    uses absolute products.  The gamma-dependent scale factor cancels in
    the normalization, so ``rho_plus`` is the same for every gamma > 1 (the
    argument is validated but otherwise unused).
    """
    check_gamma(gamma)
    D = diff.D if isinstance(diff, DiffMatrix) else np.asarray(diff, dtype=float)
    sigma2 = np.sum(D ** 2, axis=0)
    if np.any(sigma2 == 0.0):
        raise DegenerateColumn("every column needs positive score dispersion")
    scale = np.sqrt(np.outer(sigma2, sigma2))
    rho = (D.T @ D) / scale
    rho_plus = (np.abs(D).T @ np.abs(D)) / scale
    np.fill_diagonal(rho, 1.0)
    np.fill_diagonal(rho_plus, 1.0)
    return CorrMatrices(rho=rho, rho_plus=rho_plus)


def _max_test_from_columns(D, sigma, assignment, gamma, method, orient,
                           tol=1e-4, seed=0, n_draws=100_000):
    """p-value machinery for the max statistic on already-built columns.

    ``orient`` is +1 to test the upper tail of the stored columns and -1
    for the lower tail (the benefit direction of pseudo columns).  Returns
    (m, p). Degenerate columns must already be dropped.
    """
    gamma = check_gamma(gamma)
    t_cols = D.T @ assignment
    stats = orient * t_cols / sigma
    m = float(stats.max())

    if method == "montecarlo":
        # Simulates the bounding max with per-column worst-case signs
        # coupled through shared uniforms (diagnostic for the bound).
        rng = np.random.default_rng(seed)
        p_plus = gamma / (1.0 + gamma)
        mags = np.abs(D)
        tol_tie = _tie_tol(D)
        hits = 0
        chunk = max(1, min(n_draws, 2 ** 22 // max(1, D.shape[0])))
        remaining = n_draws
        while remaining > 0:
            size = min(chunk, remaining)
            signs = np.where(rng.random((size, D.shape[0])) < p_plus, 1.0, -1.0)
            sims = (signs @ mags) / sigma
            hits += int(np.count_nonzero(sims.max(axis=1) >= m - tol_tie))
            remaining -= size
        return m, hits / n_draws

    if method != "normal":
        raise ValueError(f"method must be normal or montecarlo, got {method!r}")
    if gamma == 1.0:
        corr = correlations(D).rho
        limits = np.full(D.shape[1], m)
    else:
        corr = correlations(D).rho_plus
        g = (gamma - 1.0) / (gamma + 1.0)
        h = 2.0 * math.sqrt(gamma) / (gamma + 1.0)
        mu_plus = g * np.sum(np.abs(D), axis=0)
        sd_plus = h * sigma
        limits = (m * sigma - mu_plus) / sd_plus
    if D.shape[1] == 1:
        return m, float(1.0 - ndtr(limits[0]))
    return m, float(1.0 - mvn_cdf(limits, corr, tol=tol, seed=seed))


def overall_test(sample, grid, gamma=1.0, include_ppw=False, method="normal",
                 direction="benefit", tol=1e-4, seed=0, n_draws=100_000) -> TestResult:
    """Max-type test of no effect over the whole grid.

    ``direction="benefit"`` orients every column so a treated survival
    advantage increases the max statistic; ``"harm"`` tests the reverse.
    Columns with zero dispersion are dropped with a warning; when all
    columns are degenerate the p-value is 1.
    """
    if direction not in ("benefit", "harm"):
        raise ValueError("direction must be 'benefit' or 'harm'")
    gamma = check_gamma(gamma)
    diff = diff_matrix(sample, grid, include_ppw=include_ppw)
    keep = diff.sigma > 0.0
    if not np.all(keep):
        dropped = [lab for lab, k in zip(diff.labels, keep) if not k]
        warnings.warn(
            f"dropping degenerate grid columns {dropped}",
            DegenerateColumnWarning,
            stacklevel=2,
        )
    if not np.any(keep):
        return TestResult(statistic=float("nan"), null_mean=0.0, null_sd=1.0,
                          p_value=1.0, gamma=gamma, method=method,
                          direction=direction, tau="overall")
    orient = -1.0 if direction == "benefit" else 1.0
    m, p = _max_test_from_columns(diff.D[:, keep], diff.sigma[keep],
                                  sample.assignment, gamma, method, orient,
                                  tol=tol, seed=seed, n_draws=n_draws)
    return TestResult(statistic=m, null_mean=0.0, null_sd=1.0, p_value=p,
                      gamma=gamma, method=method, direction=direction,
                      tau="overall")


def ppw_test(sample, gamma=1.0, direction="upper", method="normal",
             n_draws=100_000, seed=0) -> TestResult:
    """Paired Prentice-Wilcoxon test of no effect at all.

    PW scores grow with survival time, so ``direction="upper"`` tests for
    a treated survival advantage.
    """
    scores = pair_differences(sample, "pw")
    return _score_test(scores, sample, gamma, method, direction, "overall",
                       n_draws=n_draws, seed=seed)
