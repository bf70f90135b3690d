import numpy as np
import pytest

from mohaf import GenerationConfig, Instance, JobEvent, TraceError, build_instance, generate_resources, parse_job_events, request_from_job
from mohaf.ingest import parse_columns


def test_parse_examples():
    assert parse_job_events(["0,123,0,2,5"]) == [JobEvent(0, 123, 0, 2, 5)]
    assert parse_job_events(["0,123,1,2,5"]) == []
    assert parse_job_events([]) == []


def test_parse_skips_and_counts_malformed_and_clamps():
    events = parse_job_events(["0,1,0,9,50", "garbage", "0,2", "", "0,3,0,-2,-1"])
    assert events == [JobEvent(0, 1, 0, 3, 10), JobEvent(0, 3, 0, 0, 0)]
    assert events.malformed == 2


def test_column_map():
    cols = parse_columns("timestamp=4,job_id=0,event_type=1,scheduling_class=2,priority=3")
    assert parse_job_events(["77,0,3,9,100"], cols) == [JobEvent(100, 77, 0, 3, 9)]
    with pytest.raises(ValueError):
        parse_columns("bogus=1")


def test_unreadable_path(tmp_path):
    with pytest.raises(TraceError):
        parse_job_events(tmp_path / "missing.csv")


def test_request_mapping_examples():
    rng = np.random.default_rng(0)
    r = request_from_job(JobEvent(0, 1, 0, 2, 5), rng)
    assert r.demand == pytest.approx(2 / 3) and r.priority == 0.5 and r.budget == pytest.approx(15.8333333, abs=1e-6)
    r = request_from_job(JobEvent(0, 2, 0, 3, 10), rng)
    assert (r.demand, r.priority, r.budget) == (1.0, 1.0, 25.0)
    r = request_from_job(JobEvent(0, 3, 0, 0, 4), rng)
    assert r.demand == pytest.approx(1 / 6) and r.budget == pytest.approx(20 / 6 + 0.4 * 5)
    assert all(-100 <= c <= 100 for c in r.location)
    assert (r.min_reliability, r.min_availability, r.max_latency) == (0.95, 0.95, 150.0)


RANGES = {"capacity": (0.5, 1.0), "cost": (0.3, 0.8), "reliability": (0.95, 1.0),
          "availability": (0.95, 1.0), "energy_eff": (0.6, 0.9)}


def test_resource_attribute_ranges_and_means():
    res = generate_resources(10_000, 1)
    for name, (a, b) in RANGES.items():
        vals = np.array([getattr(r, name) for r in res])
        assert vals.min() >= a and vals.max() <= b
        assert abs(vals.mean() - (a + b) / 2) <= (b - a) / 20
    xy = np.array([r.location for r in res])
    assert xy.min() >= -100 and xy.max() <= 100 and abs(xy.mean()) <= 200 / 20


def test_generation_is_deterministic():
    assert generate_resources(50, 3) == generate_resources(50, 3)
    assert build_instance(GenerationConfig(100, 25, 7)) == build_instance(GenerationConfig(100, 25, 7))


def test_build_counts_and_full_scale_shape():
    inst = build_instance(GenerationConfig(100, 25, 7))
    assert (len(inst.requests), len(inst.resources)) == (100, 25)
    big = build_instance(GenerationConfig(3553, 888, 0))
    assert (len(big.requests), len(big.resources)) == (3553, 888)


def test_build_from_trace_and_shortfall(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("\n".join(f"{t},{t},{t % 2},{t % 4},{t % 11}" for t in range(40)) + "\n")
    events = parse_job_events(path)
    assert len(events) == 20
    inst = build_instance(GenerationConfig(20, 5, 1), events)
    assert [r.demand for r in inst.requests[:2]] == [1 / 6, 2 / 3]
    with pytest.raises(TraceError, match="short by 1"):
        build_instance(GenerationConfig(21, 5, 1), events)


def test_json_round_trip_is_bit_exact():
    inst = build_instance(GenerationConfig(60, 15, 9))
    assert Instance.from_json(inst.to_json()) == inst
    assert Instance.from_json(inst.to_json()).to_json() == inst.to_json()
