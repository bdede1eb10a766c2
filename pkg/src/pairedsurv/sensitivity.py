"""Time-specific randomization tests and worst-case sensitivity bounds.

The paired statistic is ``T = sum_i d_i V_i``.  Under the bounded
odds-ratio assignment model with parameter ``gamma >= 1``, the worst case
for the upper tail replaces each term by ``|d_i|`` times an independent
sign that is positive with probability ``gamma / (1 + gamma)``; gamma = 1
recovers the plain randomization distribution.  Lower-tail tests use the
mirror-image worst case, which equals the upper-tail analysis applied to
the negated differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import LengthMismatch, TooManyPairs
from .scores import ScoreSet, pair_differences

DIRECTIONS = ("upper", "lower")
EXACT_PAIR_CAP = 20


def check_gamma(gamma) -> float:
    gamma = float(gamma)
    if not math.isfinite(gamma) or gamma < 1.0:
        raise ValueError(f"gamma must be a finite real >= 1, got {gamma!r}")
    return gamma


def _check_direction(direction) -> str:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    return direction


def _as_d(scores) -> np.ndarray:
    if isinstance(scores, ScoreSet):
        return scores.d
    return np.asarray(scores, dtype=float).reshape(-1)


def _tie_tol(d) -> float:
    # ties at the observed value must count; resummation order shifts sums
    # by O(eps * scale)
    return 1e-12 * max(1.0, float(np.sum(np.abs(d))))


@dataclass(frozen=True)
class TestResult:
    """Outcome of a one-sided test: statistic, null moments, p-value."""

    statistic: float
    null_mean: float
    null_sd: float
    p_value: float
    gamma: float
    method: str
    direction: str
    tau: float | str | None

    def __post_init__(self):
        if not (0.0 <= self.p_value <= 1.0):
            raise ValueError("p_value must lie in [0, 1]")
        if self.null_sd < 0:
            raise ValueError("null_sd must be >= 0")


def t_statistic(scores, sample) -> float:
    """Observed ``sum_i d_i V_i``."""
    d = _as_d(scores)
    v = sample.assignment
    if d.shape[0] != v.shape[0]:
        raise LengthMismatch(
            f"scores have {d.shape[0]} pairs but sample has {v.shape[0]}"
        )
    return float(d @ v)


def null_moments(scores, gamma=1.0):
    """Worst-case mean and variance of the upper-tail bounding statistic.

    ``mean = [(gamma-1)/(1+gamma)] sum |d_i|`` and
    ``variance = [4 gamma/(1+gamma)^2] sum d_i^2``.
    """
    gamma = check_gamma(gamma)
    d = _as_d(scores)
    mean = (gamma - 1.0) / (gamma + 1.0) * float(np.sum(np.abs(d)))
    variance = 4.0 * gamma / (gamma + 1.0) ** 2 * float(np.sum(d * d))
    return mean, variance


def pvalue_normal(t, mean, variance, direction="upper") -> float:
    """Normal tail probability with the degenerate-variance convention.

    Zero variance returns 1 when the statistic does not exceed the mean in
    the test direction, else 0 (no dispersion means no evidence).
    """
    _check_direction(direction)
    if variance < 0:
        raise ValueError("variance must be >= 0")
    if variance == 0.0:
        if direction == "upper":
            return 1.0 if t <= mean else 0.0
        return 1.0 if t >= mean else 0.0
    z = (t - mean) / math.sqrt(variance)
    return float(1.0 - ndtr(z)) if direction == "upper" else float(ndtr(z))


def pvalue_exact(scores, t, gamma=1.0, direction="upper", max_pairs=EXACT_PAIR_CAP) -> float:
    """Worst-case tail probability by exact enumeration.

    Enumerates the 2^k sign patterns over the k pairs with nonzero
    differences (tied pairs contribute exactly zero).  Ties at the observed
    value are included in the tail.
    """
    gamma = check_gamma(gamma)
    _check_direction(direction)
    d = _as_d(scores)
    if direction == "lower":
        # Pr(T- <= t) = Pr(T+ >= -t): mirror worst case
        return pvalue_exact(-d, -t, gamma, "upper", max_pairs)
    mags = np.abs(d[d != 0.0])
    if mags.size > max_pairs:
        raise TooManyPairs(
            f"{mags.size} informative pairs exceed the exact cap of {max_pairs}"
        )
    p_plus = gamma / (1.0 + gamma)
    values = np.zeros(1)
    probs = np.ones(1)
    for a in mags:
        values = np.concatenate((values + a, values - a))
        probs = np.concatenate((probs * p_plus, probs * (1.0 - p_plus)))
    return float(probs[values >= t - _tie_tol(d)].sum())


def pvalue_montecarlo(scores, t, gamma=1.0, n_draws=100_000, seed=0,
                      direction="upper") -> float:
    """Worst-case tail probability by simulation; deterministic given seed."""
    gamma = check_gamma(gamma)
    _check_direction(direction)
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    d = _as_d(scores)
    if direction == "lower":
        return pvalue_montecarlo(-d, -t, gamma, n_draws, seed, "upper")
    mags = np.abs(d[d != 0.0])
    tol = _tie_tol(d)
    if mags.size == 0:
        return 1.0 if 0.0 >= t - tol else 0.0
    p_plus = gamma / (1.0 + gamma)
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = max(1, min(n_draws, 2 ** 22 // mags.size))
    remaining = n_draws
    while remaining > 0:
        size = min(chunk, remaining)
        signs = np.where(rng.random((size, mags.size)) < p_plus, 1.0, -1.0)
        hits += int(np.count_nonzero(signs @ mags >= t - tol))
        remaining -= size
    return hits / n_draws


def _score_test(scores, sample, gamma, method, direction, tau_label,
                n_draws=100_000, seed=0, max_pairs=EXACT_PAIR_CAP) -> TestResult:
    """Shared p-value dispatch for any ScoreSet."""
    gamma = check_gamma(gamma)
    _check_direction(direction)
    t = t_statistic(scores, sample)
    mu_plus, variance = null_moments(scores, gamma)
    mean = mu_plus if direction == "upper" else -mu_plus
    if method == "normal":
        p = pvalue_normal(t, mean, variance, direction)
    elif method == "exact":
        p = pvalue_exact(scores, t, gamma, direction, max_pairs)
    elif method == "montecarlo":
        p = pvalue_montecarlo(scores, t, gamma, n_draws, seed, direction)
    else:
        raise ValueError(f"method must be normal, exact or montecarlo, got {method!r}")
    return TestResult(
        statistic=t,
        null_mean=mean,
        null_sd=math.sqrt(variance),
        p_value=p,
        gamma=gamma,
        method=method,
        direction=direction,
        tau=tau_label,
    )


def time_specific_test(sample, tau, gamma=1.0, method="normal",
                       direction="lower", n_draws=100_000, seed=0,
                       max_pairs=EXACT_PAIR_CAP) -> TestResult:
    """Test of no effect up to ``tau`` using pseudo-observation scores.

    With the stored event-probability orientation, a treated survival
    advantage pushes the statistic down, so ``direction="lower"`` (the
    default) tests for benefit and ``"upper"`` for harm.  gamma = 1 gives
    the randomization p-value, gamma > 1 the worst-case bound.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    scores = pair_differences(sample, "pseudo", tau)
    return _score_test(scores, sample, gamma, method, direction, tau,
                       n_draws=n_draws, seed=seed, max_pairs=max_pairs)


@dataclass(frozen=True)
class SensitivityValue:
    """Smallest gamma at which the worst-case p-value crosses alpha."""

    value: float
    already_sensitive: bool
    exceeded_max: bool
    alpha: float


def sensitivity_value(sample, tau=None, grid=None, alpha=0.05, tol=1e-3,
                      gamma_max=10.0, direction="lower", include_ppw=False,
                      seed=0) -> SensitivityValue:
    """Bisect for the gamma where the worst-case p-value crosses ``alpha``.

    Exactly one of ``tau`` (time-specific test, in ``direction``) or
    ``grid`` (overall max-type test, always benefit-oriented) must be
    given.  Returns gamma = 1 flagged ``already_sensitive`` when even the
    randomization p-value exceeds alpha, and ``gamma_max`` flagged
    ``exceeded_max`` when the worst-case p-value stays below alpha on the
    whole range.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if (tau is None) == (grid is None):
        raise ValueError("give exactly one of tau or grid")

    if tau is not None:
        def p_at(g):
            return time_specific_test(sample, tau, g, "normal", direction).p_value
    else:
        from .overall import overall_test

        def p_at(g):
            return overall_test(sample, grid, gamma=g, include_ppw=include_ppw,
                                method="normal", seed=seed).p_value

    if p_at(1.0) > alpha:
        return SensitivityValue(1.0, True, False, alpha)
    if p_at(gamma_max) <= alpha:
        return SensitivityValue(gamma_max, False, True, alpha)
    lo, hi = 1.0, gamma_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if p_at(mid) <= alpha:
            lo = mid
        else:
            hi = mid
    return SensitivityValue(0.5 * (lo + hi), False, False, alpha)
