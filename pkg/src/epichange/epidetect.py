"""Epidemic changepoint detection with an unknown background mean.

The detector makes one optimal-partitioning pass in which the background
mean is re-estimated online from the points accepted as background, then
(unless run online) a second pass with the background frozen at the final
estimate. With a known background the second pass alone is exact optimal
partitioning.

Decisions that the pseudocode leaves open:

* a point is background only if its cost is strictly lower than the best
  segment ending there; among equally good segment lengths the shortest
  wins;
* the estimator starts at ``w = x_1`` with no accepted points, so ``w`` is
  always the running mean of the accepted set (or ``x_1`` while it is
  empty);
* choosing a segment of length ``k`` at ``t`` restores the background set
  held at ``t - k``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .cost import LOG_2PI, CostParams, Pruning, _mle_cost, epidemic_cost
from .errors import TooShort
from .series import TimeSeries


@dataclass
class BackgroundEstimator:
    """Running mean of the points accepted as background."""

    count: int = 0
    w: float = 0.0

    def accept(self, x: float) -> None:
        self.w = self.w + (x - self.w) / (self.count + 1)
        self.count += 1


@dataclass(frozen=True)
class Segment:
    """A detected or true segment, 1-based and inclusive.

    ``level`` is the absolute mean estimate. ``mean`` equals ``level``
    except for a signal nested in a nuisance segment, where it is the
    offset from the nuisance level; ``parent`` then holds the ordinal of
    that nuisance segment among the nuisance segments of the result.
    """

    kind: str
    start: int
    end: int
    mean: float
    level: float
    parent: int | None = None

    def __post_init__(self):
        if self.kind not in ("signal", "nuisance"):
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if not 1 <= self.start <= self.end:
            raise ValueError(f"bad segment bounds ({self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start + 1


@dataclass
class DetectionResult:
    segments: list[Segment]
    theta0: float
    total_cost: float
    n: int
    warning: str | None = None
    background: BackgroundEstimator | None = None
    meta: dict = field(default_factory=dict)

    @property
    def signals(self) -> list[Segment]:
        return [s for s in self.segments if s.kind == "signal"]

    @property
    def nuisances(self) -> list[Segment]:
        return [s for s in self.segments if s.kind == "nuisance"]

    @property
    def k_signal(self) -> int:
        return len(self.signals)

    @property
    def m_nuisance(self) -> int:
        return len(self.nuisances)

    def intervals(self, kind: str | None = None) -> list[tuple[int, int]]:
        return [(s.start, s.end) for s in self.segments if kind is None or s.kind == kind]


@njit(cache=True)
def _op_step(x, s1, s2, off, t, hl, iv, beta, l, update, theta, F, G, w, cnt, back):
    """Advance an unpruned pass over ``x[off:]`` to position ``t``.

    ``F[s] + C(x_{s+1:t})`` is split into ``G[s]`` (depends on ``s`` only),
    a cross term, and a tail that depends on ``t`` only.
    """
    xt = x[off + t - 1]
    cur = w[t - 1] if update else theta
    d = xt - cur
    fb = F[t - 1] + (hl + d * d * iv)
    hi1 = s1[off + t]
    tail = t * hl + s2[off + t] * iv
    best = np.inf
    bestk = 0
    for k in range(1, min(l, t) + 1):
        s = t - k
        e = hi1 - s1[off + s]
        v = (G[s] - e * e * iv / k) + tail
        if v + beta < best:
            best = v + beta
            bestk = k
    if fb < best:
        F[t] = fb
        back[t] = 0
        if update:
            w[t] = w[t - 1] + (xt - w[t - 1]) / (cnt[t - 1] + 1)
            cnt[t] = cnt[t - 1] + 1
    else:
        F[t] = best
        back[t] = bestk
        if update:
            w[t] = w[t - bestk]
            cnt[t] = cnt[t - bestk]
    G[t] = F[t] - t * hl - s2[off + t] * iv


@njit(cache=True)
def _op_init(x, s2, off, iv, F, G, w, cnt):
    F[0] = 0.0
    G[0] = -s2[off] * iv
    w[0] = x[off]
    cnt[0] = 0


@njit(cache=True)
def _epidemic_pass(x, s1, s2, off, L, sigma, beta, l, prune, update, theta,
                   F, G, w, cnt, back, cand, vals):
    """One optimal-partitioning pass over ``x[off:off + L]``.

    With ``update`` the background mean is tracked in ``w``/``cnt``
    (positions 0..L); otherwise it is fixed at ``theta``. ``back[t]`` is 0
    for a background point or the length of the segment ending at ``t``.
    Returns the mean candidate-set size per step.
    """
    var = sigma * sigma
    hl = 0.5 * (LOG_2PI + math.log(var))
    iv = 1.0 / (2.0 * var)
    _op_init(x, s2, off, iv, F, G, w, cnt)
    if not prune:
        for t in range(1, L + 1):
            _op_step(x, s1, s2, off, t, hl, iv, beta, l, update, theta, F, G, w, cnt, back)
        return (L + 1) / 2.0 if L <= l else l - l * (l - 1) / (2.0 * L)
    cand[0] = 0
    ncand = 1
    work = 0
    for t in range(1, L + 1):
        xt = x[off + t - 1]
        cur = w[t - 1] if update else theta
        d = xt - cur
        fb = F[t - 1] + (hl + d * d * iv)
        hi1 = s1[off + t]
        tail = t * hl + s2[off + t] * iv
        best = np.inf
        bestk = 0
        for j in range(ncand - 1, -1, -1):
            s = cand[j]
            e = hi1 - s1[off + s]
            v = (G[s] - e * e * iv / (t - s)) + tail
            vals[j] = v
            if v + beta < best:
                best = v + beta
                bestk = t - s
        work += ncand
        if fb < best:
            F[t] = fb
            back[t] = 0
            if update:
                w[t] = w[t - 1] + (xt - w[t - 1]) / (cnt[t - 1] + 1)
                cnt[t] = cnt[t - 1] + 1
        else:
            F[t] = best
            back[t] = bestk
            if update:
                w[t] = w[t - bestk]
                cnt[t] = cnt[t - bestk]
        G[t] = F[t] - t * hl - s2[off + t] * iv
        keep = 0
        lo = t + 1 - l
        for j in range(ncand):
            s = cand[j]
            if s >= lo and vals[j] < F[t]:
                cand[keep] = s
                keep += 1
        cand[keep] = t
        ncand = keep + 1
    return work / L


@njit(cache=True)
def _prune_step(F, costs_to_t, cand, t, l):
    # costs_to_t[j] = C(x_{cand[j]+1:t}); mirrors the inline rule above.
    out = []
    for j in range(cand.shape[0]):
        s = cand[j]
        if s >= t + 1 - l and F[s] + costs_to_t[j] < F[t]:
            out.append(s)
    out.append(t)
    return out


def prune_candidates(F, candidates, t, ts: TimeSeries, sigma: float, max_seg_len: int) -> list[int]:
    """Candidate segment starts that survive after step ``t``.

    A candidate ``s`` (segment would start at ``s + 1``) is kept only while
    ``F[s] + C(x_{s+1:t}) < F[t]`` and ``s >= t + 1 - max_seg_len``;
    ``t`` itself is always added.
    """
    cand = np.asarray(candidates, dtype=np.int64)
    costs = np.array([
        _mle_cost(ts.prefix_sum[t] - ts.prefix_sum[s], ts.prefix_sumsq[t] - ts.prefix_sumsq[s], t - s, sigma)
        for s in cand
    ])
    return list(_prune_step(np.asarray(F, dtype=np.float64), costs, cand, t, max_seg_len))


class _Workspace:
    def __init__(self, L, l):
        self.F = np.empty(L + 1)
        self.G = np.empty(L + 1)
        self.w = np.empty(L + 1)
        self.cnt = np.empty(L + 1, dtype=np.int64)
        self.back = np.empty(L + 1, dtype=np.int64)
        self.cand = np.empty(l + 2, dtype=np.int64)
        self.vals = np.empty(l + 2)


def _run_pass(ts, off, L, sigma, beta, l, prune, update, theta, ws=None):
    ws = ws or _Workspace(L, l)
    work = _epidemic_pass(ts.values, ts.prefix_sum, ts.prefix_sumsq, off, L, float(sigma),
                          float(beta), int(l), bool(prune), bool(update), float(theta),
                          ws.F, ws.G, ws.w, ws.cnt, ws.back, ws.cand, ws.vals)
    return ws, work


def _backtrack(back, L):
    spans = []
    t = L
    while t > 0:
        k = back[t]
        if k == 0:
            t -= 1
        else:
            spans.append((int(t - k + 1), int(t)))
            t -= k
    spans.reverse()
    return spans


def _signal_segments(ts, spans, off=0):
    out = []
    for a, b in spans:
        level = (ts.prefix_sum[off + b] - ts.prefix_sum[off + a - 1]) / (b - a + 1)
        out.append(Segment("signal", off + a, off + b, float(level), float(level)))
    return out


def _check(ts, cfg):
    if ts.n < 2:
        raise TooShort(f"need at least 2 observations, got {ts.n}")
    cfg.validate(ts.n)


def op_fixed_background(ts: TimeSeries, theta0: float, cfg: CostParams, sigma: float | None = None) -> DetectionResult:
    """Exact optimal partitioning with the background mean fixed.

    Minimises the epidemic cost over all sets of disjoint signal segments
    of length at most ``cfg.max_seg_len``. Pruning (any mode other than
    ``NONE``) discards dominated segment starts and does not change the
    result.
    """
    _check(ts, cfg)
    sigma = cfg.sigma0 if sigma is None else sigma
    l = cfg.max_seg_len
    prune = cfg.pruning is not Pruning.NONE
    ws, work = _run_pass(ts, 0, ts.n, sigma, cfg.beta_eff, l, prune, False, theta0)
    segs = _signal_segments(ts, _backtrack(ws.back, ts.n))
    return DetectionResult(segs, float(theta0), float(ws.F[ts.n]), ts.n,
                           meta={"candidates_per_step": work})


def detect_epidemic(ts: TimeSeries, cfg: CostParams, online: bool = False, sigma: float | None = None) -> DetectionResult:
    """Detect epidemic segments while estimating the background mean.

    Parameters
    ----------
    ts : TimeSeries
    cfg : CostParams
        ``sigma0``, ``beta`` and ``max_seg_len`` are used; ``mu0`` is
        ignored since it is estimated.
    online : bool
        Return the segmentation of the estimating pass instead of re-running
        with the background frozen at its final estimate.
    sigma : float, optional
        Overrides ``cfg.sigma0``.

    Returns
    -------
    DetectionResult
        Only signal segments. ``total_cost`` is the epidemic cost of the
        returned segments at the returned ``theta0``.
    """
    _check(ts, cfg)
    sigma = cfg.sigma0 if sigma is None else sigma
    l = cfg.max_seg_len
    prune = cfg.pruning is not Pruning.NONE
    ws1, work1 = _run_pass(ts, 0, ts.n, sigma, cfg.beta_eff, l, prune, True, 0.0)
    theta0 = float(ws1.w[ts.n])
    count = int(ws1.cnt[ts.n])
    warning = None
    if count == 0:
        warning = "no point was accepted as background; theta0 is the initial value x_1"
        warnings.warn(warning, RuntimeWarning, stacklevel=2)
    est = BackgroundEstimator(count, theta0)
    meta = {"candidates_per_step": work1, "online": online}
    if online:
        segs = _signal_segments(ts, _backtrack(ws1.back, ts.n))
        cost = epidemic_cost(ts, segs, theta0, sigma, cfg.beta_eff)
        return DetectionResult(segs, theta0, cost, ts.n, warning, est, meta)
    ws2, work2 = _run_pass(ts, 0, ts.n, sigma, cfg.beta_eff, l, prune, False, theta0)
    segs = _signal_segments(ts, _backtrack(ws2.back, ts.n))
    meta["candidates_per_step"] = (work1 + work2) / 2
    return DetectionResult(segs, theta0, float(ws2.F[ts.n]), ts.n, warning, est, meta)


def epidemic_window(ts: TimeSeries, a: int, b: int, sigma: float, beta: float, max_seg_len: int):
    """Two-pass detection on ``x_a..x_b`` without copying the data.

    Returns ``(cost, spans, theta0, count)`` where spans are absolute
    ``(start, end)`` pairs.
    """
    L = b - a + 1
    ws1, _ = _run_pass(ts, a - 1, L, sigma, beta, max_seg_len, False, True, 0.0)
    theta = float(ws1.w[L])
    ws2, _ = _run_pass(ts, a - 1, L, sigma, beta, max_seg_len, False, False, theta)
    spans = [(a - 1 + s, a - 1 + e) for s, e in _backtrack(ws2.back, L)]
    return float(ws2.F[L]), spans, theta, int(ws1.cnt[L])


def acceptance_radius(beta: float, sigma: float) -> float:
    """Half-width of the single-point background acceptance interval."""
    return sigma * math.sqrt(2.0 * beta)
