"""Time-series container with prefix statistics for O(1) segment queries.

Observations are indexed 1..n, so a segment ``(a, b)`` covers
``x_a, ..., x_b`` inclusive and its statistics come from
``S[b] - S[a - 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import BadRange, EmptySeries, NonFiniteValue


@njit(cache=True)
def _compensated_cumsum(values):
    # Kahan summation; out[0] = 0 so out has len(values) + 1 entries.
    out = np.zeros(values.shape[0] + 1)
    total = 0.0
    comp = 0.0
    for i in range(values.shape[0]):
        y = values[i] - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out[i + 1] = total
    return out


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Regularly sampled univariate series with prefix sums.

    Attributes
    ----------
    values : np.ndarray
        Observations ``x_1..x_n`` stored at positions ``0..n-1``.
    prefix_sum : np.ndarray
        ``S1[i] = x_1 + ... + x_i`` with ``S1[0] = 0``.
    prefix_sumsq : np.ndarray
        ``S2[i] = x_1**2 + ... + x_i**2`` with ``S2[0] = 0``.
    """

    values: np.ndarray
    prefix_sum: np.ndarray
    prefix_sumsq: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"TimeSeries(n={self.n})"

    def check_range(self, a: int, b: int) -> None:
        if not (1 <= a <= b <= self.n):
            raise BadRange(f"segment ({a}, {b}) outside 1..{self.n}")

    def segment_sum(self, a: int, b: int) -> float:
        self.check_range(a, b)
        return float(self.prefix_sum[b] - self.prefix_sum[a - 1])

    def segment_sumsq(self, a: int, b: int) -> float:
        self.check_range(a, b)
        return float(self.prefix_sumsq[b] - self.prefix_sumsq[a - 1])

    def segment_mean(self, a: int, b: int) -> float:
        return segment_mean(self, a, b)

    def subseries(self, a: int, b: int) -> "TimeSeries":
        """Return ``x_a..x_b`` as a new series (re-indexed from 1)."""
        self.check_range(a, b)
        return build(self.values[a - 1 : b])


def build(values) -> TimeSeries:
    """Build a :class:`TimeSeries` from a sequence of finite reals."""
    arr = np.array(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise EmptySeries("series has no observations")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise NonFiniteValue(int(bad[0]))
    s1 = _compensated_cumsum(arr)
    s2 = _compensated_cumsum(arr * arr)
    for a in (arr, s1, s2):
        a.flags.writeable = False
    return TimeSeries(arr, s1, s2)


def segment_mean(ts: TimeSeries, a: int, b: int) -> float:
    """Mean of ``x_a..x_b`` (1-based, inclusive)."""
    return ts.segment_sum(a, b) / (b - a + 1)
