import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from epichange import DetectionResult, EmptyInput, GroundTruth, Segment, build, sic, summarize, tpr
from epichange.metrics import RunRecord, record


def det(*spans, kind="signal"):
    return DetectionResult([Segment(kind, a, b, 0.0, 0.0) for a, b in spans], 0.0, 0.0, 100)


def test_tpr_examples():
    truth = GroundTruth([(10, 20, 1.0)])
    assert tpr(det((12, 24)), truth, 100) == 1
    assert tpr(det((12, 26)), truth, 100) == 0


def test_tpr_pools_starts_and_ends():
    truth = GroundTruth([(10, 20, 1.0)])
    assert tpr(det((20, 30), (1, 10)), truth, 100) == 1


def test_type_aware():
    truth = GroundTruth([], [(30, 50, 1.0)])
    found = DetectionResult([Segment("nuisance", 30, 40, 0, 0), Segment("signal", 45, 50, 0, 0)], 0, 0, 100)
    assert tpr(found, truth, 100) == 1
    assert tpr(found, truth, 100, type_aware=True) == 0
    assert tpr(found, truth, 100, kind="nuisance") == 0
    assert tpr(found, truth, 100, kind="signal") == 1


def test_empty_truth_and_empty_detection():
    assert tpr(det(), GroundTruth(), 100) == 1
    assert tpr(det(), GroundTruth([(5, 9, 1.0)]), 100) == 0


@given(st.lists(st.tuples(st.integers(1, 100), st.integers(0, 10)), max_size=5),
       st.lists(st.tuples(st.integers(1, 100), st.integers(0, 10)), max_size=5),
       st.tuples(st.integers(1, 100), st.integers(0, 10)))
def test_tpr_monotone(true_spans, found, extra):
    truth = GroundTruth([(a, a + k, 1.0) for a, k in true_spans])
    before = tpr(det(*[(a, a + k) for a, k in found]), truth, 100)
    after = tpr(det(*[(a, a + k) for a, k in found + [extra]]), truth, 100)
    assert after >= before


def test_sic_all_zero():
    ts = build(np.zeros(100))
    base = sic(ts, DetectionResult([], 0.0, 0.0, 100), 0.0, 1.0)
    assert base == pytest.approx(193.00, abs=5e-3)
    spurious = sic(ts, det((10, 12)), 0.0, 1.0)
    assert spurious - base == pytest.approx(3 * math.log(100), abs=1e-9)


def test_sic_six_points_by_hand():
    x = [0.0, 1.0, 4.0, 6.0, 1.0, 8.0]
    ts = build(x)
    nested = DetectionResult([Segment("nuisance", 2, 5, 0.5, 0.5), Segment("signal", 3, 4, 4.5, 5.0, 0)],
                             0.0, 0.0, 6)
    # fitted means 0, .5, 5, 5, .5, 0 under sigma 2
    rss = 0 + 0.25 + 1 + 1 + 0.25 + 64
    nll = 6 * 0.5 * math.log(2 * math.pi * 4) + rss / 8
    expect = 2 * nll + 8 * math.log(6)
    assert sic(ts, nested, 0.0, 2.0) == pytest.approx(expect, rel=1e-12)
    alts = {
        "flat": DetectionResult([], 0.0, 0.0, 6),
        "spike": DetectionResult([Segment("signal", 6, 6, 8.0, 8.0)], 0.0, 0.0, 6),
        "both": DetectionResult([Segment("signal", 3, 4, 5.0, 5.0), Segment("signal", 6, 6, 8.0, 8.0)],
                                0.0, 0.0, 6),
    }
    hand = {"flat": 2 * (6 * 0.5 * math.log(8 * math.pi) + (1 + 16 + 36 + 1 + 64) / 8) + 2 * math.log(6),
            "spike": 2 * (6 * 0.5 * math.log(8 * math.pi) + (1 + 16 + 36 + 1) / 8) + 5 * math.log(6),
            "both": 2 * (6 * 0.5 * math.log(8 * math.pi) + (1 + 1 + 1 + 1) / 8) + 8 * math.log(6)}
    for k, res in alts.items():
        assert sic(ts, res, 0.0, 2.0) == pytest.approx(hand[k], rel=1e-12)
    assert min(hand, key=hand.get) == "both"


def test_summarize_examples():
    recs = [RunRecord(c, f) for c, f in zip([1, 1, 1, 2], [1, 1, 0, 1])]
    s = summarize(recs)
    assert s.mean_segments == 1.25
    assert s.tpr == 0.75
    assert s.reps == 4
    with pytest.raises(EmptyInput):
        summarize([])


def test_relative_bias():
    truth = GroundTruth([(10, 20, 1.0)], [(30, 60, 2.0)])
    runs = [record(det((10, 20)), truth, 100), record(det((10, 20), (40, 41)), truth, 100)]
    s = summarize(runs)
    assert s.bias_signal == pytest.approx(0.5)
    assert s.bias_nuisance == pytest.approx(-1.0)
    assert math.isnan(summarize([record(det(), GroundTruth(), 100)]).bias_signal)


def test_theta0_quantiles():
    recs = [RunRecord(0, 1, theta0=float(v)) for v in range(101)]
    q = summarize(recs).theta0_quantiles
    assert q == pytest.approx((2.5, 25, 50, 75, 97.5))
