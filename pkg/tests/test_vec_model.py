import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kato.vec_model import (
    ConfigurationError,
    GenConfig,
    RsuProfile,
    Scenario,
    SystemParams,
    TaskSpec,
    VehicleState,
    db_to_linear,
    distance_at,
    local_compute_time,
    mobcheck_filter,
    mobcheck_horizon,
    sample_scenario,
    transmission_rate,
)

from conftest import make_scenario


def test_sampling_is_deterministic():
    a = sample_scenario(GenConfig.fixed(20), seed=7)
    b = sample_scenario(GenConfig.fixed(20), seed=7)
    assert a.to_dict() == b.to_dict()
    assert len(a.rsus) == 19


def test_sampled_beta_range_and_in_range_invariant():
    cfg = GenConfig.fixed(50)
    for seed in range(20):
        s = sample_scenario(cfg, seed)
        for r in s.rsus:
            assert 0.1 <= r.beta <= 10.0
            assert 20.0 <= r.eta_db <= 30.0
            assert 0 <= r.x <= 100 and 0 <= r.y <= 100
            assert distance_at(s, r.id, 0.0) <= s.params.comm_range_xi
        assert 0.1 <= s.vehicle.beta0 <= 10.0
        # deadline defaults to local computing time
        assert s.task.deadline_T == local_compute_time(s.task, s.vehicle)


def test_unreachable_area_is_a_configuration_error():
    cfg = GenConfig.fixed(5, params=SystemParams(area_side=10_000.0), max_tries=50)
    with pytest.raises(ConfigurationError):
        sample_scenario(cfg, seed=1)


def test_bad_ranges_rejected():
    with pytest.raises(ConfigurationError):
        GenConfig(n=(10, 5))


def test_db_conversion():
    assert db_to_linear(20.0) == pytest.approx(100.0, rel=1e-15)
    assert RsuProfile(1, 0, 0, 1.0, 30.0).eta_lin == pytest.approx(1000.0)


@pytest.fixture
def triangle():
    rsu = RsuProfile(1, 30.0, 40.0, 1.0, 20.0)
    return make_scenario([rsu], beta0=5.0, speed=10.0)


@pytest.mark.parametrize("t, expected", [(0.0, 50.0), (3.0, 40.0), (6.0, 50.0)])
def test_distance_at(triangle, t, expected):
    assert distance_at(triangle, 1, t) == pytest.approx(expected, rel=1e-12)


def test_distance_unknown_rsu(triangle):
    with pytest.raises(KeyError):
        distance_at(triangle, 9, 0.0)


@pytest.mark.parametrize("eta, d, m, expected", [
    (3.0, 1.0, 1, 100.0),
    (3.0, 1.0, 2, 50.0),
    (100.0, 100.0, 1, 0.7177646488535028),  # 50 * ln(1.01) / ln(2)
])
def test_transmission_rate(eta, d, m, expected):
    assert transmission_rate(eta, d, 50.0, m) == pytest.approx(expected, rel=1e-12)


def test_transmission_rate_rejects_zero_distance():
    with pytest.raises(ValueError):
        transmission_rate(100.0, 0.0, 50.0, 1)


@given(eta=st.floats(1.0, 1e3), d=st.floats(1.0, 150.0), B=st.floats(1.0, 100.0),
       m=st.integers(1, 50))
def test_transmission_rate_monotone(eta, d, B, m):
    r = transmission_rate(eta, d, B, m)
    assert transmission_rate(eta, d, B, m + 1) < r
    assert transmission_rate(eta, d * 1.01, B, m) < r
    assert transmission_rate(eta * 1.01, d, B, m) > r
    assert transmission_rate(eta, d, B * 1.01, m) > r


@pytest.mark.parametrize("Q, beta0, expected", [(1.0, 5.0, 5.0), (2.0, 0.5, 1.0), (1.0, 10.0, 10.0)])
def test_local_compute_time(Q, beta0, expected):
    assert local_compute_time(TaskSpec(Q, 1.0), VehicleState(0, 0, 0, beta0)) == expected


def test_mobcheck_filter_examples():
    behind = RsuProfile(1, -50.0, 100.0, 1.0, 25.0)
    ahead = RsuProfile(2, 75.0, 100.0, 1.0, 25.0)
    # checked at t = min(T=10, T_loc=5) = 5 s, from (75, 0)
    s = make_scenario([behind, ahead], beta0=5.0, T=10.0, speed=15.0)
    assert mobcheck_horizon(s) == 5.0
    assert distance_at(s, 1, 0.0) <= 150.0
    assert distance_at(s, 1, 5.0) == pytest.approx(math.hypot(125.0, 100.0))  # > 150
    assert distance_at(s, 2, 5.0) == pytest.approx(100.0)
    assert [r.id for r in mobcheck_filter(s)] == [2]


def test_mobcheck_static_vehicle_keeps_everything():
    s = sample_scenario(GenConfig.fixed(30, speed=0.0), seed=3)
    assert mobcheck_filter(s) == s.rsus


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), speed=st.floats(0.0, 40.0))
def test_mobcheck_subsequence_and_idempotent(seed, speed):
    s = sample_scenario(GenConfig.fixed(15, speed=speed), seed)
    kept = mobcheck_filter(s)
    ids = [r.id for r in s.rsus]
    kept_ids = [r.id for r in kept]
    assert kept_ids == [i for i in ids if i in set(kept_ids)]
    assert mobcheck_filter(s.with_rsus(kept)) == kept


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), speed=st.floats(5.0, 40.0))
def test_distance_convexity_endpoint_bound(seed, speed):
    s = sample_scenario(GenConfig.fixed(10, speed=speed), seed)
    t_check = mobcheck_horizon(s)
    for r in mobcheck_filter(s):
        dense = [distance_at(s, r.id, t) for t in np.linspace(0.0, t_check, 201)]
        assert max(dense) <= s.params.comm_range_xi + 1e-9


def test_scenario_rejects_out_of_range_rsu():
    with pytest.raises(ValueError):
        make_scenario([RsuProfile(1, 200.0, 0.0, 1.0, 25.0)])


def test_scenario_round_trip():
    s = sample_scenario(GenConfig.fixed(12), seed=11)
    assert Scenario.from_dict(s.to_dict()) == s
