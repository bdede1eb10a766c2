"""Kaplan-Meier product-limit estimation.

Tie convention throughout the library: events precede censorings at the
same timestamp (a unit censored at t is still at risk for events at t),
and simultaneous events are pooled into a single risk-set step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInput


def _coerce_units(times, events=None):
    """Accept (times, events) arrays or an iterable of Unit-likes."""
    if events is None:
        items = list(times)
        if items and hasattr(items[0], "time"):
            times = [u.time for u in items]
            events = [u.event for u in items]
        else:
            times = [t for t, _ in items]
            events = [e for _, e in items]
    t = np.asarray(times, dtype=float).reshape(-1)
    e = np.asarray(events, dtype=bool).reshape(-1)
    if t.shape != e.shape:
        raise ValueError("times and events must have equal length")
    return t, e


def event_table(times, events=None):
    """Distinct event times with risk-set sizes.

    Returns ``(t, m, n)``: sorted distinct times at which at least one
    event occurred, the pooled event count at each, and the number at risk
    (units with observed time >= t, censored-at-t units included).
    """
    t, e = _coerce_units(times, events)
    if t.size == 0:
        raise EmptyInput("no units supplied")
    order = np.argsort(t, kind="mergesort")
    ts, es = t[order], e[order]
    uniq, first = np.unique(ts, return_index=True)
    m = np.add.reduceat(es.astype(np.int64), first) if ts.size else np.array([], int)
    n_at_risk = ts.size - first
    keep = m > 0
    return uniq[keep], m[keep], n_at_risk[keep]


@dataclass(frozen=True)
class SurvivalCurve:
    """Right-continuous step estimate of a survival function.

    ``values[k]`` is the estimate at and after ``knots[k]``; before the
    first knot the curve is 1.  ``n_at_risk``/``n_events`` record the
    risk-set bookkeeping behind each step.
    """

    knots: np.ndarray
    values: np.ndarray
    n_at_risk: np.ndarray = field(default=None)
    n_events: np.ndarray = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size and (np.any(np.diff(v) > 1e-15) or v[0] > 1 + 1e-15 or v[-1] < -1e-15):
            raise ValueError("survival values must be non-increasing within [0, 1]")

    def __call__(self, t):
        return km_at(self, t)


def km_estimate(times, events=None) -> SurvivalCurve:
    """Kaplan-Meier estimate over the pooled units.

    ``K(t) = prod_{t_k <= t} (1 - m_k / n_k)`` across distinct event times.
    """
    t, e = _coerce_units(times, events)
    if t.size == 0:
        raise EmptyInput("no units supplied")
    tk, mk, nk = event_table(t, e)
    values = np.cumprod(1.0 - mk / nk)
    return SurvivalCurve(knots=tk, values=values, n_at_risk=nk, n_events=mk)


def km_at(curve: SurvivalCurve, t):
    """Evaluate the step function at ``t`` (scalar or array), right-continuous."""
    t = np.asarray(t, dtype=float)
    idx = np.searchsorted(curve.knots, t, side="right")
    padded = np.concatenate(([1.0], curve.values))
    out = padded[idx]
    return float(out) if out.ndim == 0 else out
