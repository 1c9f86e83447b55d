import numpy as np
import pytest

from kato import bench
from kato.neural import init_model

MODELS = {a: init_model(a, seed=2) for a in ("kato", "sa", "mlp")}


def test_grid_is_deterministic_and_sized():
    a = bench.grid_scenarios(20, 3, seed=1)
    b = bench.grid_scenarios(20, 3, seed=1)
    assert [s.to_dict() for s in a] == [s.to_dict() for s in b]
    assert all(s.n == 20 and s.vehicle.speed_v == 15.0 for s in a)


def test_report_columns_and_optimal_gap():
    rows = bench.bench_delay(MODELS, sizes=(20,), count=3, seed=0)
    assert tuple(rows[0])[:len(bench.REPORT_FIELDS)] == bench.REPORT_FIELDS
    assert {r["policy"] for r in rows} == {"optimal_prefix", "kato", "decc", "lb", "mlp", "sa"}
    for r in rows:
        assert r["gap"] >= -1e-9
        if r["policy"] == "optimal_prefix":
            assert abs(r["gap"]) <= 1e-9


def test_delay_rows_rerun_identically_except_wall_time():
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_time_us"} for r in rows]
    a = bench.bench_delay(MODELS, sizes=(20, 30), count=2, seed=4)
    b = bench.bench_delay(MODELS, sizes=(20, 30), count=2, seed=4)
    assert strip(a) == strip(b)


def test_delay_accepts_models_keyed_by_size():
    rows = bench.bench_delay({20: MODELS}, sizes=(20,), count=1, policies=("kato",))
    assert len(rows) == 1


def test_success_rate_static_vehicle_is_total():
    rows = bench.bench_success_rate(MODELS["kato"], speeds=(0.0,), sizes=(20,), count=10)
    assert all(r["success"] == 1 for r in rows)
    assert {r["mobcheck"] for r in rows} == {0, 1}


def test_success_rate_with_mobcheck_is_total():
    rows = bench.bench_success_rate(MODELS["kato"], speeds=(19.0,), sizes=(30,), count=20,
                                    mobcheck_modes=(True,))
    assert all(r["success"] == 1 for r in rows)


def test_runtime_skips_brute_force_above_cap():
    rows = bench.bench_runtime(MODELS, sizes=(10, 50), count=1, reps=1,
                               policies=("kato", "optimal_bruteforce"))
    by = {(r["n"], r["policy"]) for r in rows}
    assert (10, "optimal_bruteforce") in by
    assert (50, "kato") in by
    assert all(r["wall_time_us"] > 0 for r in rows)


def test_downsize():
    s = bench.grid_scenarios(30, 1, seed=0, speed=0.0)[0]
    small = bench.downsize(s, 20, seed=0)
    assert small.n == 20
    ids = [r.id for r in small.rsus]
    assert ids == sorted(ids, key=[r.id for r in s.rsus].index)
    assert bench.downsize(s, 30, seed=0) is s


def test_generalization_reports_finite_gaps_at_smaller_sizes():
    rows = bench.bench_generalization({30: MODELS["kato"]}, eval_sizes=(20, 30), count=2)
    assert {r["n"] for r in rows} == {20, 30}
    assert all(np.isfinite(r["gap"]) and r["train_n"] == 30 for r in rows)


def test_generalization_full_size_matches_delay_numbers():
    gen = bench.bench_generalization({20: MODELS["kato"]}, eval_sizes=(20,), count=3)
    scen = bench.grid_scenarios(20, 3, 0, speed=0.0)
    ref = bench.evaluate(scen, ("kato", "optimal"), MODELS)
    assert [r["makespan_s"] for r in gen] == [r["makespan_s"] for r in ref]


def test_summarize():
    rows = [{"policy": "a", "gap": 0.1, "success": 1, "wall_time_us": 3},
            {"policy": "a", "gap": 0.3, "success": 0, "wall_time_us": 5}]
    (s,) = bench.summarize(rows)
    assert s["mean_gap"] == pytest.approx(0.2)
    assert s["success_rate"] == 0.5 and s["median_wall_us"] == 4
