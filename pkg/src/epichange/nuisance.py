"""Two-level detection of short signal segments over a shifting background.

Long segments (longer than ``max_seg_len``) are modelled as nuisance shifts
of the background. The cost of a candidate nuisance window is obtained by
running the epidemic detector inside it, with the nuisance level as the
unknown background and nested signal segments allowed. Short segments
outside nuisance windows are scored against the known background ``mu0``.

Ties: background beats signal beats nuisance; among equally good
segments the shortest wins, for both signal lengths and nuisance starts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .cost import LOG_2PI, CostParams, Pruning
from .epidetect import (
    DetectionResult,
    Segment,
    _epidemic_pass,
    _op_init,
    _op_step,
    epidemic_window,
)
from .errors import ConfigError, TooShort, WindowTooShort
from .series import TimeSeries

_MODES = {Pruning.NONE: 0, Pruning.GLOBAL: 1, Pruning.WINDOW: 2}

# Above this length the per-window pass state no longer fits comfortably
# in memory and inner runs are recomputed from scratch.
CACHE_MAX_N = 4000


@njit(cache=True)
def _window_cost(x, s1, s2, off, L, sigma, beta, l, F, G, w, cnt, back, cand, vals):
    _epidemic_pass(x, s1, s2, off, L, sigma, beta, l, False, True, 0.0,
                   F, G, w, cnt, back, cand, vals)
    theta = w[L]
    _epidemic_pass(x, s1, s2, off, L, sigma, beta, l, False, False, theta,
                   F, G, w, cnt, back, cand, vals)
    return F[L]


@njit(cache=True)
def _nuisance_dp(x, s1, s2, mu0, sigma0, sigma_n, beta, beta_p, l, mode, width,
                 thr, maxlen, use_cache, F, kind, arg, alive, V):
    n = x.shape[0]
    var0 = sigma0 * sigma0
    hl0 = 0.5 * (LOG_2PI + math.log(var0))
    iv0 = 1.0 / (2.0 * var0)
    varn = sigma_n * sigma_n
    hln = 0.5 * (LOG_2PI + math.log(varn))
    ivn = 1.0 / (2.0 * varn)

    rows = n if use_cache else 1
    cols = n + 1 if use_cache else 1
    p1F = np.empty((rows, cols))
    p1G = np.empty((rows, cols))
    p1w = np.empty((rows, cols))
    p1c = np.empty((rows, cols), dtype=np.int64)
    p2F = np.empty((rows, cols))
    p2G = np.empty((rows, cols))
    p2len = np.full(rows, -1, dtype=np.int64)
    p2th = np.zeros(rows)
    scratch_back = np.empty(n + 1, dtype=np.int64)
    scratch_w = np.empty(n + 1)
    scratch_c = np.empty(n + 1, dtype=np.int64)
    sF = np.empty(n + 1)
    sG = np.empty(n + 1)
    sw = np.empty(n + 1)
    sc = np.empty(n + 1, dtype=np.int64)
    cand = np.empty(l + 2, dtype=np.int64)
    vals = np.empty(l + 2)

    inner_runs = 0
    inner_full = 0
    F[0] = 0.0
    for tp in range(n):
        alive[tp] = True
    for t in range(1, n + 1):
        lo_tp = 0 if maxlen <= 0 else max(0, t - maxlen)
        for tp in range(0, lo_tp):
            alive[tp] = False
        if use_cache:
            for tp in range(lo_tp, t):
                if not alive[tp]:
                    continue
                if tp == t - 1:
                    _op_init(x, s2, tp, ivn, p1F[tp], p1G[tp], p1w[tp], p1c[tp])
                _op_step(x, s1, s2, tp, t - tp, hln, ivn, beta, l, True, 0.0,
                         p1F[tp], p1G[tp], p1w[tp], p1c[tp], scratch_back)

        fn = np.inf
        argn = -1
        for tp in range(t - l - 1, lo_tp - 1, -1):
            if not alive[tp]:
                continue
            L = t - tp
            inner_runs += 1
            if use_cache:
                th = p1w[tp, L]
                if p2len[tp] == L - 1 and p2th[tp] == th:
                    _op_step(x, s1, s2, tp, L, hln, ivn, beta, l, False, th,
                             p2F[tp], p2G[tp], scratch_w, scratch_c, scratch_back)
                else:
                    inner_full += 1
                    _op_init(x, s2, tp, ivn, p2F[tp], p2G[tp], scratch_w, scratch_c)
                    for u in range(1, L + 1):
                        _op_step(x, s1, s2, tp, u, hln, ivn, beta, l, False, th,
                                 p2F[tp], p2G[tp], scratch_w, scratch_c, scratch_back)
                p2len[tp] = L
                p2th[tp] = th
                cp = p2F[tp, L]
            else:
                inner_full += 1
                cp = _window_cost(x, s1, s2, tp, L, sigma_n, beta, l,
                                  sF, sG, sw, sc, scratch_back, cand, vals)
            V[tp] = F[tp] + cp
            v = V[tp] + beta_p
            if v < fn:
                fn = v
                argn = tp

        d = x[t - 1] - mu0
        fb = F[t - 1] + (hl0 + d * d * iv0)
        fs = np.inf
        ks = 0
        for k in range(1, min(l, t) + 1):
            e = s1[t] - s1[t - k]
            c = k * hl0 + (s2[t] - s2[t - k] - e * e / k) * iv0
            v = (F[t - k] + c) + beta
            if v < fs:
                fs = v
                ks = k
        if fb <= fs and fb <= fn:
            F[t] = fb
            kind[t] = 0
            arg[t] = 1
        elif fs <= fn:
            F[t] = fs
            kind[t] = 1
            arg[t] = ks
        else:
            F[t] = fn
            kind[t] = 2
            arg[t] = argn

        if mode != 0 and argn >= 0:
            lo = lo_tp if mode == 1 else max(lo_tp, t - width)
            low = np.inf
            for tp in range(lo, t - l):
                if alive[tp] and V[tp] < low:
                    low = V[tp]
            for tp in range(lo, t - l):
                if alive[tp] and V[tp] >= low + thr:
                    alive[tp] = False
    return inner_runs, inner_full


@dataclass
class NuisanceDPState:
    """Per-prefix optimum and back-pointers of the two-level recursion.

    ``kind[t]`` is 0 (background point), 1 (signal segment of length
    ``arg[t]`` ending at ``t``) or 2 (nuisance window ``arg[t]+1..t``).
    ``alive`` marks nuisance-window starts ``t'`` still in the candidate
    set after the last step.
    """

    F: np.ndarray
    kind: np.ndarray
    arg: np.ndarray
    alive: np.ndarray

    def structure(self, t: int | None = None):
        """Signal and nuisance spans of the optimal solution for ``x_1..x_t``."""
        t = len(self.F) - 1 if t is None else t
        signals, nuisance = [], []
        while t > 0:
            k, a = int(self.kind[t]), int(self.arg[t])
            if k == 0:
                t -= 1
            elif k == 1:
                signals.append((t - a + 1, t))
                t -= a
            else:
                nuisance.append((a + 1, t))
                t = a
        return signals[::-1], nuisance[::-1]


def _check(ts, cfg):
    if ts.n < 2:
        raise TooShort(f"need at least 2 observations, got {ts.n}")
    if cfg.mu0 is None:
        raise ConfigError("the nuisance detector needs mu0 (known or pre-estimated)")
    cfg.validate(ts.n)


def run_dp(ts: TimeSeries, cfg: CostParams, use_cache: bool | None = None):
    """Run the two-level recursion and return ``(state, stats)``."""
    _check(ts, cfg)
    n = ts.n
    if use_cache is None:
        use_cache = n <= CACHE_MAX_N
    F = np.empty(n + 1)
    kind = np.zeros(n + 1, dtype=np.int64)
    arg = np.zeros(n + 1, dtype=np.int64)
    alive = np.zeros(n, dtype=np.bool_)
    V = np.full(n, np.inf)
    mode = _MODES[cfg.pruning]
    runs, full = _nuisance_dp(
        ts.values, ts.prefix_sum, ts.prefix_sumsq, float(cfg.mu0), float(cfg.sigma0),
        float(cfg.sigma_n), float(cfg.beta_eff), float(cfg.beta_prime_eff), cfg.max_seg_len, mode,
        int(cfg.window or 0), float(cfg.prune_threshold(n)), int(cfg.max_nuisance_len or 0),
        bool(use_cache), F, kind, arg, alive, V,
    )
    stats = {"inner_evaluations": int(runs), "inner_full_runs": int(full),
             "surviving_starts": int(alive.sum()), "cached": bool(use_cache)}
    return NuisanceDPState(F, kind, arg, alive), stats


def window_cost_Cprime(ts: TimeSeries, a: int, b: int, cfg: CostParams):
    """Cost of modelling ``x_a..x_b`` as one nuisance window.

    Runs the two-pass epidemic detector on the window with scale
    ``sigma_n``. The cost includes ``beta`` for every nested signal
    segment but not the nuisance penalty ``beta_prime``.

    Returns
    -------
    cost : float
    inner : list of Segment
        Nested signal segments in absolute coordinates; ``mean`` is the
        offset from the nuisance level.
    level : float
        Estimated nuisance level.
    """
    ts.check_range(a, b)
    if b - a + 1 <= cfg.max_seg_len:
        raise WindowTooShort(f"window ({a}, {b}) is not longer than max_seg_len={cfg.max_seg_len}")
    cost, spans, level, _ = epidemic_window(ts, a, b, cfg.sigma_n, cfg.beta_eff, cfg.max_seg_len)
    inner = []
    for s, e in spans:
        m = (ts.prefix_sum[e] - ts.prefix_sum[s - 1]) / (e - s + 1)
        inner.append(Segment("signal", s, e, float(m - level), float(m)))
    return cost, inner, level


def prune_nuisance_starts(values, t: int, cfg: CostParams, n: int) -> set[int]:
    """Nuisance-window starts that survive pruning at step ``t``.

    ``values`` maps each live start ``t'`` (window ``t'+1..t``) to
    ``F(t') + C'(x_{t'+1:t})``. A start is dropped when its value is at
    least the minimum plus ``alpha * log(n) ** (1 + delta)``; the minimum
    runs over all live starts (global) or over those with
    ``t' >= t - window`` (window).
    """
    live = dict(values)
    if cfg.pruning is Pruning.NONE or not live:
        return set(live)
    if cfg.pruning is Pruning.WINDOW:
        pool = {k: v for k, v in live.items() if k >= t - cfg.window}
    else:
        pool = live
    if not pool:
        return set(live)
    cut = min(pool.values()) + cfg.prune_threshold(n)
    return {k for k in live if not (k in pool and pool[k] >= cut)}


def detect_nuisance(ts: TimeSeries, cfg: CostParams, use_cache: bool | None = None) -> DetectionResult:
    """Detect signal segments and nuisance shifts of the background.

    Parameters
    ----------
    ts : TimeSeries
    cfg : CostParams
        Needs ``mu0``. Nuisance windows are always longer than
        ``max_seg_len``; signal segments at most that long.
    use_cache : bool, optional
        Reuse inner detector state across window extensions. Results are
        identical either way; defaults to on for series up to
        ``CACHE_MAX_N`` points.

    Returns
    -------
    DetectionResult
        Segments sorted by start (a nuisance segment precedes the signals
        it contains). ``theta0`` is ``cfg.mu0``.
    """
    state, stats = run_dp(ts, cfg, use_cache)
    sig_spans, nuis_spans = state.structure()
    nuis, nested = [], []
    for j, (a, b) in enumerate(nuis_spans):
        _, inner, level = window_cost_Cprime(ts, a, b, cfg)
        nuis.append(Segment("nuisance", a, b, float(level), float(level)))
        nested.extend(Segment("signal", s.start, s.end, s.mean, s.level, j) for s in inner)
    outer = []
    for a, b in sig_spans:
        m = float((ts.prefix_sum[b] - ts.prefix_sum[a - 1]) / (b - a + 1))
        outer.append(Segment("signal", a, b, m, m))
    segments = sorted(nuis + nested + outer, key=lambda s: (s.start, s.kind != "nuisance"))
    return DetectionResult(segments, float(cfg.mu0), float(state.F[ts.n]), ts.n,
                           meta={**stats, "state": state})
