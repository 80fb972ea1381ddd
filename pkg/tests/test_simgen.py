import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from epichange import ConfigError, GroundTruth, ScenarioSpec, UnknownScenario, generate
from epichange.simgen import SCENARIOS, default_config, interval, truth_for


def test_s1_truth():
    _, truth = generate(ScenarioSpec("S1", 750, 7))
    assert truth.signal == [(226, 375, 3.0)]
    assert truth.nuisance == []


def test_n2_truth():
    truth = truth_for("N2", 240)
    assert truth.nuisance == [(49, 96, 1.0)]
    assert truth.signal == [(121, 144, 3.0), (169, 192, -3.0)]


def test_interval_is_exact_for_awkward_lengths():
    from fractions import Fraction
    # 0.7 * 90 is 62.99999999999999 in floating point
    assert interval(Fraction(5, 10), Fraction(7, 10), 90) == (46, 63)


@pytest.mark.parametrize("sid", SCENARIOS)
def test_deterministic(sid):
    a, _ = generate(ScenarioSpec(sid, 100, 11, 3))
    b, _ = generate(ScenarioSpec(sid, 100, 11, 3))
    assert a.values.tobytes() == b.values.tobytes()


def test_replicates_and_seeds_differ():
    base = generate(ScenarioSpec("S1", 200, 1, 0))[0].values
    assert not np.array_equal(base, generate(ScenarioSpec("S1", 200, 1, 1))[0].values)
    assert not np.array_equal(base, generate(ScenarioSpec("S1", 200, 2, 0))[0].values)


def test_errors():
    with pytest.raises(UnknownScenario):
        ScenarioSpec("S9", 100, 0)
    with pytest.raises(ConfigError):
        ScenarioSpec("S1", 9, 0)
    with pytest.raises(UnknownScenario):
        default_config("X", 100)


def test_background_mean_is_zero():
    ts, truth = generate(ScenarioSpec("S2", 100_000, 5))
    mask = np.ones(ts.n, dtype=bool)
    for s, e, _ in truth.signal:
        mask[s - 1:e] = False
    bg = ts.values[mask]
    assert abs(bg.mean()) < 3 / np.sqrt(bg.size)


def test_t3_variance():
    ts, truth = generate(ScenarioSpec("S3", 100_000, 5))
    (s, e, _), = truth.signal
    bg = np.r_[ts.values[:s - 1], ts.values[e:]]
    assert bg.var() == pytest.approx(3.0, rel=0.1)


def test_means_are_added():
    ts, truth = generate(ScenarioSpec("N1", 50_000, 2))
    (ns, ne, nth), = truth.nuisance
    (ss, se, sth), = truth.signal
    assert ts.values[ss - 1:se].mean() == pytest.approx(nth + sth, abs=0.05)
    assert ts.values[se:ne].mean() == pytest.approx(nth, abs=0.05)


@given(st.sampled_from(SCENARIOS), st.integers(10, 5000))
def test_truth_intervals_are_ordered_and_in_range(sid, n):
    truth = truth_for(sid, n)
    for s, e, _ in truth.signal + truth.nuisance:
        assert 1 <= s and e <= n and s <= e + 1


def test_truth_round_trip():
    t = truth_for("N2", 240)
    assert GroundTruth.from_dict(t.to_dict(zero_based=True), zero_based=True) == t
    assert t.to_dict(zero_based=True)["nuisance"] == [[48, 95, 1.0]]


def test_default_config():
    cfg = default_config("N1", 100)
    assert cfg.max_seg_len == 33 and cfg.mu0 == 0.0
    assert default_config("N2", 240).max_seg_len == 36
    assert default_config("S3", 100).sigma0 == pytest.approx(np.sqrt(3))
    assert default_config("S1", 101).max_seg_len == 50
