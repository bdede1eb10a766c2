"""Censored-data scores: pseudo-observations, log-rank, Prentice-Wilcoxon.

All scores are computed on the pooled 2I units and then differenced within
pairs.  Orientation conventions:

* ``pseudo_observations`` returns jackknife pseudo-values of the pooled
  Kaplan-Meier survival probability at ``tau`` (a unit surviving past tau
  scores high).
* ``pair_differences(kind="pseudo")`` stores pseudo-values of the event
  probability ``1 - K(tau)`` instead, so a pair whose first unit fails
  earlier gets a positive difference.  This is the orientation in which
  the library's worked examples and the max-type machinery are expressed;
  for these scores evidence of a treated survival advantage sits in the
  LOWER tail of ``sum_i d_i V_i``.
* Log-rank and Prentice-Wilcoxon scores use their classical definitions,
  where longer survival scores higher, so a treated advantage sits in the
  UPPER tail.

``benefit_tail(kind)`` records that mapping for callers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput
from .km import _coerce_units, event_table, km_at, km_estimate


def pseudo_observations(times, events=None, tau=None):
    """Leave-one-out pseudo-values of the Kaplan-Meier estimate at ``tau``.

    For unit u out of n pooled units, ``q_u = n K(tau) - (n-1) K_{-u}(tau)``
    with ``K_{-u}`` the Kaplan-Meier estimate recomputed without u.  The
    leave-one-out estimates are obtained from prefix products over the full
    sample's risk sets (remove u from every risk set at event times up to
    min(Y_u, tau), and remove its own event if it has one), so the whole
    vector costs O(n log n).

    Parameters
    ----------
    times, events : pooled observed times and event flags (2I units), or a
        single iterable of unit-likes.
    tau : evaluation time, >= 0.

    Returns
    -------
    (n,) array of pseudo-values, aligned with the input order.
    """
    if tau is None:
        raise TypeError("tau is required")
    t, e = _coerce_units(times, events)
    n = t.size
    if n < 2:
        raise EmptyInput("pseudo-observations need at least two units")
    if tau < 0:
        raise ValueError("tau must be >= 0")

    tk, mk, nk = event_table(t, e)
    k = tk.size
    if k == 0:
        return np.ones(n)

    fact_b = (nk - mk) / nk
    # Factor with the removed unit taken out of the risk set.  Positions
    # with nk == 1 get a placeholder: they are only ever reached as a
    # unit's own event time, where the correction below swaps them out.
    with np.errstate(divide="ignore", invalid="ignore"):
        fact_a = np.where(nk > 1, (nk - 1.0 - mk) / np.maximum(nk - 1, 1), 1.0)

    zero_a = fact_a == 0.0
    zero_b = fact_b == 0.0
    # Zero-aware prefixes: (# zero factors, product of nonzero factors).
    zca = np.concatenate(([0], np.cumsum(zero_a)))
    zcb = np.concatenate(([0], np.cumsum(zero_b)))
    pa = np.concatenate(([1.0], np.cumprod(np.where(zero_a, 1.0, fact_a))))
    pb = np.concatenate(([1.0], np.cumprod(np.where(zero_b, 1.0, fact_b))))

    k_tau = int(np.searchsorted(tk, tau, side="right"))
    km_tau = 0.0 if zcb[k_tau] > 0 else pb[k_tau]

    # Zone A: event times <= min(Y_u, tau), where u was at risk.
    cut = np.searchsorted(tk, np.minimum(t, tau), side="right")
    zeros = zca[cut].astype(np.int64)
    prod = pa[cut].copy()

    # Own-event correction: at u's own event time the reduced sample loses
    # both one at-risk unit and one event, factor (n0 - m0) / (n0 - 1).
    own = e & (t <= tau)
    if np.any(own):
        k0 = np.searchsorted(tk, t[own])
        fa0 = fact_a[k0]
        n0 = nk[k0].astype(float)
        m0 = mk[k0].astype(float)
        zeros[own] -= (fa0 == 0.0).astype(np.int64)
        prod[own] /= np.where(fa0 == 0.0, 1.0, fa0)
        f_own = np.where(n0 > 1, (n0 - m0) / np.maximum(n0 - 1.0, 1.0), 1.0)
        zeros[own] += (f_own == 0.0).astype(np.int64)
        prod[own] *= np.where(f_own == 0.0, 1.0, f_own)

    # Zone B: event times in (Y_u, tau], factors unchanged by the removal.
    zeros += zcb[k_tau] - zcb[cut]
    prod *= pb[k_tau] / pb[cut]

    km_loo = np.where(zeros > 0, 0.0, prod)
    return n * km_tau - (n - 1) * km_loo


def pseudo_observations_naive(times, events=None, tau=None):
    """Reference pseudo-values by literal leave-one-out recomputation, O(n^2)."""
    if tau is None:
        raise TypeError("tau is required")
    t, e = _coerce_units(times, events)
    n = t.size
    if n < 2:
        raise EmptyInput("pseudo-observations need at least two units")
    if tau < 0:
        raise ValueError("tau must be >= 0")
    km_tau = km_at(km_estimate(t, e), tau)
    keep = np.ones(n, dtype=bool)
    out = np.empty(n)
    for u in range(n):
        keep[u] = False
        out[u] = n * km_tau - (n - 1) * km_at(km_estimate(t[keep], e[keep]), tau)
        keep[u] = True
    return out


def logrank_scores(times, events=None):
    """Log-rank scores ``H(Y_u) - event_u`` from the pooled Nelson-Aalen hazard."""
    t, e = _coerce_units(times, events)
    if t.size == 0:
        raise EmptyInput("no units supplied")
    tk, mk, nk = event_table(t, e)
    cumhaz = np.concatenate(([0.0], np.cumsum(mk / nk)))
    h_at = cumhaz[np.searchsorted(tk, t, side="right")]
    return h_at - e.astype(float)


def pw_scores(times, events=None):
    """Prentice-Wilcoxon scores ``1 - (1 + event_u) J(Y_u)``.

    ``J(a) = prod_{t_k <= a} (n_k - m_k + 1) / (n_k + 1)`` over pooled
    distinct event times; scores lie in [-1, 1].
    """
    t, e = _coerce_units(times, events)
    if t.size == 0:
        raise EmptyInput("no units supplied")
    tk, mk, nk = event_table(t, e)
    j = np.concatenate(([1.0], np.cumprod((nk - mk + 1.0) / (nk + 1.0))))
    j_at = j[np.searchsorted(tk, t, side="right")]
    return 1.0 - (1.0 + e.astype(float)) * j_at


SCORE_KINDS = ("pseudo", "logrank", "pw")


@dataclass(frozen=True)
class ScoreSet:
    """Per-unit scores and within-pair differences at one analysis time.

    ``q`` has shape (I, 2); ``d[i] = q[i, 0] - q[i, 1]`` always.  ``tau``
    is None for the time-agnostic kinds.  For ``kind="pseudo"`` the stored
    scores are event-probability pseudo-values (see module docstring).
    """

    tau: float | None
    q: np.ndarray
    d: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in SCORE_KINDS:
            raise ValueError(f"kind must be one of {SCORE_KINDS}")
        if not np.array_equal(self.d, self.q[:, 0] - self.q[:, 1]):
            raise ValueError("d must equal q[:, 0] - q[:, 1]")

    @property
    def n_pairs(self) -> int:
        return self.d.shape[0]


def benefit_tail(kind: str) -> str:
    """Tail of ``sum d_i V_i`` where a treated survival advantage shows up."""
    if kind == "pseudo":
        return "lower"
    if kind in ("logrank", "pw"):
        return "upper"
    raise ValueError(f"unknown score kind {kind!r}")


def pair_differences(sample, kind: str = "pseudo", tau=None) -> ScoreSet:
    """Pooled scores of the requested kind, differenced within pairs."""
    if kind not in SCORE_KINDS:
        raise ValueError(f"kind must be one of {SCORE_KINDS}")
    t = sample.unit_times
    e = sample.unit_events
    if kind == "pseudo":
        if tau is None:
            raise TypeError("pseudo scores require tau")
        q = 1.0 - pseudo_observations(t, e, tau)
    elif kind == "logrank":
        q = logrank_scores(t, e)
    else:
        q = pw_scores(t, e)
    q = q.reshape(-1, 2)
    return ScoreSet(tau=tau if kind == "pseudo" else None, q=q, d=q[:, 0] - q[:, 1], kind=kind)
