"""Exact minimisers for small instances, used as ground truth in tests.

``brute_unknown_bg`` enumerates every set of disjoint segments explicitly
(depth-first, background before segments, shorter segments first) and
keeps the first strict minimum. The fixed-background and nuisance oracles
exploit additivity through a suffix recursion, which is exact but shares
no code with the forward recursions of the detectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .cost import LOG_2PI, CostParams, cost_fixed_mean, cost_mle_mean
from .epidetect import DetectionResult, Segment
from .errors import AllPointsSegmented, ConfigError, TooLarge
from .series import TimeSeries


@dataclass(frozen=True)
class EnumerationBudget:
    max_n: int = 18
    max_segments: int | None = None

    def __post_init__(self):
        if self.max_n > 20:
            raise ConfigError("enumeration is exponential; max_n must be <= 20")

    def check(self, n: int) -> None:
        if n > self.max_n:
            raise TooLarge(f"n={n} exceeds the enumeration budget of {self.max_n}")


def _signal(ts, a, b, sigma):
    _, m = cost_mle_mean(ts, a, b, sigma)
    return Segment("signal", a, b, m, m)


def brute_fixed_bg(ts: TimeSeries, theta0: float, cfg: CostParams,
                   budget: EnumerationBudget = EnumerationBudget(), sigma: float | None = None) -> DetectionResult:
    """Exact minimum of the epidemic cost with the background fixed.

    Ties prefer a background point, then the shortest segment, at the
    earliest position where two solutions differ.
    """
    budget.check(ts.n)
    sigma = cfg.sigma0 if sigma is None else sigma
    n, l, beta = ts.n, cfg.max_seg_len, cfg.beta_eff
    cap = budget.max_segments if budget.max_segments is not None else n

    @lru_cache(maxsize=None)
    def best(i, used):
        # minimum cost of x_i..x_n with `used` segments already placed
        if i > n:
            return 0.0, ()
        c, rest = best(i + 1, used)
        out = (cost_fixed_mean(ts, i, i, theta0, sigma) + c, rest)
        if used < cap:
            for k in range(1, min(l, n - i + 1) + 1):
                c, rest = best(i + k, used + 1)
                v = cost_mle_mean(ts, i, i + k - 1, sigma)[0] + beta + c
                if v < out[0]:
                    out = (v, ((i, i + k - 1),) + rest)
        return out

    cost, spans = best(1, 0)
    segs = [_signal(ts, a, b, sigma) for a, b in spans]
    return DetectionResult(segs, float(theta0), cost, n)


@njit(cache=True)
def _enumerate(x, l, beta, sigma, cap, choice_out):
    """Depth-first search over all segmentations of ``x``.

    Each leaf is scored with the background mean set to the mean of its
    background points; leaves without background points are skipped.
    ``choice_out[i]`` receives 0 for a background point or ``k`` for a
    segment of length ``k`` starting at ``i``, -1 elsewhere.
    """
    n = x.shape[0]
    var = sigma * sigma
    hl = 0.5 * (LOG_2PI + math.log(var))
    iv = 1.0 / (2.0 * var)
    pos = np.zeros(n + 1, dtype=np.int64)
    opt = np.full(n + 1, -1, dtype=np.int64)
    nseg = np.zeros(n + 1, dtype=np.int64)
    sb = np.zeros(n + 1)
    qb = np.zeros(n + 1)
    cb = np.zeros(n + 1, dtype=np.int64)
    segc = np.zeros(n + 1)
    best = np.inf
    found = False
    d = 0
    while d >= 0:
        i = pos[d]
        if i == n:
            if cb[d] > 0:
                c = segc[d] + cb[d] * hl + (qb[d] - sb[d] * sb[d] / cb[d]) * iv
                if c < best:
                    best = c
                    found = True
                    for j in range(n):
                        choice_out[j] = -1
                    for e in range(d):
                        choice_out[pos[e]] = opt[e]
            d -= 1
            continue
        opt[d] += 1
        o = opt[d]
        if o > min(l, n - i) or (o > 0 and nseg[d] >= cap):
            opt[d] = -1
            d -= 1
            continue
        if o == 0:
            pos[d + 1] = i + 1
            sb[d + 1] = sb[d] + x[i]
            qb[d + 1] = qb[d] + x[i] * x[i]
            cb[d + 1] = cb[d] + 1
            segc[d + 1] = segc[d]
            nseg[d + 1] = nseg[d]
        else:
            s = 0.0
            q = 0.0
            for j in range(i, i + o):
                s += x[j]
                q += x[j] * x[j]
            pos[d + 1] = i + o
            sb[d + 1] = sb[d]
            qb[d + 1] = qb[d]
            cb[d + 1] = cb[d]
            segc[d + 1] = segc[d] + o * hl + (q - s * s / o) * iv + beta
            nseg[d + 1] = nseg[d] + 1
        opt[d + 1] = -1
        d += 1
    return best, found


def _exact_unknown(x, l, beta, sigma, cap):
    choice = np.full(x.shape[0], -1, dtype=np.int64)
    cost, found = _enumerate(np.ascontiguousarray(x, dtype=np.float64), int(l), float(beta),
                             float(sigma), int(cap), choice)
    if not found:
        raise AllPointsSegmented("every admissible segmentation leaves no background point")
    spans, bg = [], []
    for i, k in enumerate(choice.tolist()):
        if k == 0:
            bg.append(i)
        elif k > 0:
            spans.append((i + 1, i + k))
    level = float(np.mean(x[bg]))
    return float(cost), spans, level


def brute_unknown_bg(ts: TimeSeries, cfg: CostParams, budget: EnumerationBudget = EnumerationBudget(),
                     sigma: float | None = None) -> DetectionResult:
    """Joint exact minimum over segmentations and the background mean.

    For a fixed segmentation the best background mean is the mean of its
    background points, so enumerating segmentations suffices.
    """
    budget.check(ts.n)
    sigma = cfg.sigma0 if sigma is None else sigma
    cap = budget.max_segments if budget.max_segments is not None else ts.n
    cost, spans, level = _exact_unknown(ts.values, cfg.max_seg_len, cfg.beta_eff, sigma, cap)
    segs = [_signal(ts, a, b, sigma) for a, b in spans]
    return DetectionResult(segs, level, cost, ts.n)


def exact_window_costs(ts: TimeSeries, cfg: CostParams) -> dict:
    """Exact inner cost of every admissible nuisance window.

    Maps ``(a, b)`` to ``(cost, spans, level)``; the cost includes
    ``beta`` per nested segment but not ``beta_prime``.
    """
    n, l = ts.n, cfg.max_seg_len
    top = cfg.max_nuisance_len or n
    out = {}
    for a in range(1, n + 1):
        for b in range(a + l, min(n, a + top - 1) + 1):
            try:
                out[a, b] = _exact_unknown(ts.values[a - 1:b], l, cfg.beta_eff, cfg.sigma_n, b - a + 1)
            except AllPointsSegmented:
                pass
    return out


def brute_nuisance(ts: TimeSeries, cfg: CostParams, max_n: int = 14, windows: dict | None = None) -> DetectionResult:
    """Exact minimum of the two-level cost.

    Nuisance segments are longer than ``max_seg_len`` and each nuisance
    level is the mean of that window's non-signal points; signal segments
    are at most ``max_seg_len`` long and either lie inside one nuisance
    window or outside all of them. Ties prefer background, then signal,
    then nuisance, then shorter segments.
    """
    if ts.n > max_n:
        raise TooLarge(f"n={ts.n} exceeds the nuisance oracle limit of {max_n}")
    if cfg.mu0 is None:
        raise ConfigError("brute_nuisance needs mu0")
    n, l = ts.n, cfg.max_seg_len
    win = exact_window_costs(ts, cfg) if windows is None else windows

    @lru_cache(maxsize=None)
    def best(i):
        if i > n:
            return 0.0, ()
        c, rest = best(i + 1)
        out = (cost_fixed_mean(ts, i, i, cfg.mu0, cfg.sigma0) + c, rest)
        for k in range(1, min(l, n - i + 1) + 1):
            c, rest = best(i + k)
            v = cost_mle_mean(ts, i, i + k - 1, cfg.sigma0)[0] + cfg.beta_eff + c
            if v < out[0]:
                out = (v, (("S", i, i + k - 1),) + rest)
        for j in range(i + l, n + 1):
            if (i, j) not in win:
                continue
            c, rest = best(j + 1)
            v = win[i, j][0] + cfg.beta_prime_eff + c
            if v < out[0]:
                out = (v, (("N", i, j),) + rest)
        return out

    cost, parts = best(1)
    segs = []
    nid = 0
    for tag, a, b in parts:
        if tag == "S":
            segs.append(_signal(ts, a, b, cfg.sigma0))
            continue
        _, spans, level = win[a, b]
        segs.append(Segment("nuisance", a, b, level, level))
        for s, e in spans:
            m = float(np.mean(ts.values[a - 1 + s - 1:a - 1 + e]))
            segs.append(Segment("signal", a - 1 + s, a - 1 + e, m - level, m, nid))
        nid += 1
    return DetectionResult(segs, float(cfg.mu0), cost, n)
