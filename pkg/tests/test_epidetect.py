import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

import _reference as ref
from epichange import (
    ConfigError, CostParams, TooShort, build, brute_fixed_bg, default_penalty, detect_epidemic,
    op_fixed_background,
)
from epichange.cost import epidemic_cost
from epichange.epidetect import BackgroundEstimator, acceptance_radius, epidemic_window, prune_candidates

small = st.lists(st.floats(-5, 5), min_size=2, max_size=40)


def spans(res):
    return res.intervals()


def test_known_bump_unknown_background():
    ts = build([0, 0, 0, 4, 4, 0, 0, 0, 0, 0])
    res = detect_epidemic(ts, CostParams(beta=5.0, max_seg_len=3))
    assert spans(res) == [(4, 5)]
    assert res.theta0 == pytest.approx(0.0, abs=1e-12)
    assert res.signals[0].mean == 4.0


def test_fixed_background_example():
    res = op_fixed_background(build([0, 0, 4, 4, 0, 0]), 0.0, CostParams(beta=5.0, max_seg_len=3))
    assert spans(res) == [(3, 4)]
    assert res.total_cost == pytest.approx(6 * 0.918939 + 5, abs=1e-5)


def test_constant_series_has_no_segments():
    for beta in (1e-3, 1.0, 50.0):
        res = op_fixed_background(build([1.0] * 4), 1.0, CostParams(beta=beta, max_seg_len=2))
        assert spans(res) == []
        assert res.total_cost == pytest.approx(2 * math.log(2 * math.pi), abs=1e-12)


def test_single_spike_pays_for_itself():
    # 9**2 / 2 = 40.5 > beta
    res = op_fixed_background(build([0, 9, 0]), 0.0, CostParams(beta=3.0, max_seg_len=1))
    assert spans(res) == [(2, 2)]


def test_deviance_scale_uses_half_penalty():
    ts = build([0, 0, 2.5, 0, 0])
    # gain of the spike is 2.5**2 / 2 = 3.125: below 5 but above 5 / 2
    assert spans(op_fixed_background(ts, 0.0, CostParams(beta=5.0, max_seg_len=1))) == []
    dev = CostParams(beta=5.0, max_seg_len=1, penalty_scale="deviance")
    assert spans(op_fixed_background(ts, 0.0, dev)) == [(3, 3)]


def test_errors():
    with pytest.raises(TooShort):
        detect_epidemic(build([1.0]), CostParams())
    with pytest.raises(ConfigError):
        detect_epidemic(build([1.0, 2.0, 3.0]), CostParams(max_seg_len=3))
    with pytest.raises(ConfigError):
        op_fixed_background(build([1.0, 2.0, 3.0]), 0.0, CostParams(max_seg_len=4))


def test_pure_noise_mostly_empty():
    n = 30
    cfg = CostParams(beta=default_penalty(n), max_seg_len=15)
    empty = close = 0
    for seed in range(1000):
        res = detect_epidemic(build(np.random.default_rng(seed).standard_normal(n)), cfg)
        empty += not res.segments
        close += abs(res.theta0) < 3 / math.sqrt(n)
    assert empty >= 990
    assert close >= 990


def test_estimator_running_mean():
    est = BackgroundEstimator(0, 7.0)
    xs = [1.0, 2.5, -3.0, 4.0]
    for i, x in enumerate(xs, 1):
        est.accept(x)
        assert est.w == pytest.approx(np.mean(xs[:i]), abs=1e-10)
    assert est.count == 4


@given(small, st.floats(0.3, 3), st.floats(0.1, 10), st.integers(1, 4))
def test_kernel_matches_reference(values, sigma, beta, l):
    l = min(l, len(values) - 1)
    cfg = CostParams(sigma0=sigma, beta=beta, max_seg_len=l)
    ts = build(values)
    margins = []
    cost, sp, theta = ref.two_pass(values, sigma, beta, l, margins)
    # exact ties may be resolved either way by rounding
    assume(min(margins) > 1e-7)
    res = detect_epidemic(ts, cfg)
    assert res.theta0 == pytest.approx(theta, abs=1e-9)
    assert spans(res) == sp
    assert res.total_cost == pytest.approx(cost, rel=1e-9, abs=1e-9)
    on = detect_epidemic(ts, cfg, online=True)
    _, sp1, w1, c1 = ref.epidemic(values, sigma, beta, l)
    assert spans(on) == sp1
    assert on.theta0 == pytest.approx(w1, abs=1e-9)
    assert on.background.count == c1


@given(small, st.floats(0.3, 3), st.floats(0.1, 10), st.integers(1, 4))
def test_reported_cost_is_recomputable(values, sigma, beta, l):
    l = min(l, len(values) - 1)
    ts = build(values)
    for online in (False, True):
        res = detect_epidemic(ts, CostParams(sigma0=sigma, beta=beta, max_seg_len=l), online=online)
        again = epidemic_cost(ts, res.segments, res.theta0, sigma, beta)
        assert res.total_cost == pytest.approx(again, abs=1e-6)


@given(small, st.floats(0.3, 3), st.floats(0.1, 10))
def test_unit_length_acceptance_matches_closed_form(values, sigma, beta):
    # with l = 1 each pass-1 decision is the closed-form interval test
    margins = []
    _, sp, _, _ = ref.epidemic(values, sigma, beta, 1, margins=margins)
    assume(min(margins) > 1e-7)
    seg_ends = {e for _, e in sp}
    res = detect_epidemic(build(values), CostParams(sigma0=sigma, beta=beta, max_seg_len=1), online=True)
    assert {e for _, e in res.intervals()} == seg_ends
    w, count, r = values[0], 0, acceptance_radius(beta, sigma)
    for t, x in enumerate(values, 1):
        inside = abs(x - w) < r
        if abs(abs(x - w) - r) < 1e-9:
            return
        assert inside == (t not in seg_ends)
        if inside:
            count += 1
            w += (x - w) / count


def test_pruning_does_not_change_results():
    cfg = CostParams(beta=default_penalty(200), max_seg_len=40)
    pr = cfg.with_(pruning="global")
    for seed in range(200):
        x = np.random.default_rng(seed).standard_normal(200)
        x[60:80] += 2.5 * (seed % 3)
        ts = build(x)
        a, b = detect_epidemic(ts, cfg), detect_epidemic(ts, pr)
        assert spans(a) == spans(b)
        assert a.theta0 == b.theta0
        assert a.total_cost == b.total_cost
        f1, f2 = op_fixed_background(ts, 0.1, cfg), op_fixed_background(ts, 0.1, pr)
        assert spans(f1) == spans(f2) and f1.total_cost == f2.total_cost


def test_pruning_reduces_work_inside_segments():
    x = np.zeros(400)
    x[100:300] = 6.0
    x += np.random.default_rng(1).standard_normal(400)
    cfg = CostParams(beta=10.0, max_seg_len=250)
    full = detect_epidemic(build(x), cfg).meta["candidates_per_step"]
    pruned = detect_epidemic(build(x), cfg.with_(pruning="global")).meta["candidates_per_step"]
    assert pruned < full


def test_prune_candidates_rule():
    ts = build([0.0, 0.0, 0.0])
    # nothing dominated for t <= l
    F = [0.0, 0.0, 100.0, 0.0]
    assert prune_candidates(F, [0, 1], 2, ts, 1.0, 3) == [0, 1, 2]
    # F(2) far below: candidates 0 and 1 are dominated at t = 3
    F = [10.0, 10.0, -100.0, -100.0]
    assert prune_candidates(F, [0, 1, 2], 3, ts, 1.0, 3) == [3]
    # candidates older than t - l are dropped for length
    F = [-1e9, -1e9, -1e9, -1e9, 1e9]
    assert prune_candidates(F, [0, 1, 2, 3], 4, build([0.0] * 4), 1.0, 2) == [3, 4]


def test_all_points_segmented_warns():
    # x_1 is always accepted unless the penalty is below float resolution
    ts = build([0.0, 1.0, 2.0, 3.0])
    with pytest.warns(RuntimeWarning):
        res = detect_epidemic(ts, CostParams(beta=1e-300, max_seg_len=1))
    assert res.warning is not None
    assert res.background.count == 0
    assert res.theta0 == 0.0


def test_online_returns_first_pass():
    x = [3.2, -0.5, -0.4, -2.4, 1.8, 1.1, -0.3, 0.8, 0.3, -0.6, 1.0, -0.3]
    cfg = CostParams(beta=4.0, max_seg_len=5)
    on, off = detect_epidemic(build(x), cfg, online=True), detect_epidemic(build(x), cfg)
    assert on.meta["online"] and not off.meta["online"]
    # the tail is judged against a drifting estimate during the first pass only
    assert spans(on) == [(2, 4), (8, 12)]
    assert spans(off) == [(2, 4)]
    assert on.theta0 == off.theta0 == pytest.approx(1.45)
    assert spans(op_fixed_background(build(x), off.theta0, cfg)) == spans(off)


def test_epidemic_window_is_offset_invariant():
    rng = np.random.default_rng(5)
    x = rng.standard_normal(60)
    x[20:45] += 2
    x[28:33] += 4
    ts = build(x)
    cost, sp, theta, count = epidemic_window(ts, 21, 45, 1.0, 4.0, 6)
    sub = detect_epidemic(build(x[20:45]), CostParams(beta=4.0, max_seg_len=6))
    assert cost == pytest.approx(sub.total_cost, abs=1e-9)
    assert theta == sub.theta0
    assert sp == [(a + 20, b + 20) for a, b in sub.intervals()]
    assert count == sub.background.count


def test_small_instances_match_exact_oracle(rng):
    for _ in range(200):
        n = int(rng.integers(2, 13))
        l = int(rng.integers(1, min(4, n - 1) + 1))
        x = rng.normal(0, 1, n) + rng.choice([0.0, 3.0], n, p=[0.7, 0.3])
        cfg = CostParams(beta=float(rng.uniform(0.2, 6)), max_seg_len=l)
        theta = float(rng.normal())
        a = op_fixed_background(build(x), theta, cfg)
        b = brute_fixed_bg(build(x), theta, cfg)
        assert a.total_cost == pytest.approx(b.total_cost, abs=1e-9)
