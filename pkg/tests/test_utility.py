import pytest
from hypothesis import given, strategies as st

import numpy as np

from mohaf import (FairnessHistory, UtilityWeights, aggregate_utility, cost_score, energy_score,
                   fairness_score, qos_score)
from mohaf.utility import utility_matrix

from conftest import make_request, make_resource

unit = st.floats(0, 1)


def test_cost_score_examples():
    assert cost_score(make_request(demand=1.0, budget=20), make_resource(cost=0.5)) == pytest.approx(0.975)
    assert cost_score(make_request(demand=0.7, budget=10), make_resource(cost=0.0)) == 1.0
    assert cost_score(make_request(demand=1.0, budget=10), make_resource(cost=30)) == 0.0
    assert cost_score(make_request(budget=0.0), make_resource()) == 0.0


def test_qos_score_examples():
    assert qos_score(make_request(), make_resource(reliability=1.0, availability=1.0)) == 1.0
    edge = make_request(max_latency=5.0, min_reliability=0, min_availability=0)
    r = make_resource(reliability=0.9, availability=0.9, location=(3.0, 4.0))
    assert qos_score(edge, r) == pytest.approx(0.6, abs=1e-12)
    r2 = make_resource(reliability=0.9, availability=0.9, location=(6.0, 8.0))
    assert qos_score(edge, r2) == pytest.approx(0.6, abs=1e-12)


@pytest.mark.parametrize("e", [0.9, 0.0, 0.6])
def test_energy_score_identity(e):
    assert energy_score(make_resource(energy_eff=e)) == e


def test_fairness_score_examples():
    hist = FairnessHistory(allocation_share={"q0": 1.0}, rounds_observed=1)
    assert fairness_score(make_request(priority=0.8), None) == pytest.approx(0.8)
    assert fairness_score(make_request(priority=0.8), FairnessHistory()) == pytest.approx(0.8)
    assert fairness_score(make_request("q0", priority=0.5), hist, 0.5) == 0.0
    assert fairness_score(make_request("q0", priority=0.2), hist, 0.5) == 0.0
    assert fairness_score(make_request("unknown", priority=0.2), hist, 0.5) == pytest.approx(0.2)


def test_history_records_win_share():
    hist = FairnessHistory()
    hist.record_round({"a"}, ["a", "b"])
    hist.record_round({"a", "b"}, ["a", "b"])
    assert hist.rounds_observed == 2
    assert hist.share("a") == 1.0 and hist.share("b") == 0.5 and hist.share("c") == 0.0


def test_aggregate_utility_examples():
    w = UtilityWeights()
    best = make_resource(cost=0.0, reliability=1.0, availability=1.0, energy_eff=1.0)
    assert aggregate_utility(make_request(priority=1.0), best, None, w) == pytest.approx(1.0)
    worst = make_resource(cost=100.0, reliability=0.0, availability=0.0, energy_eff=0.0, location=(500, 0))
    req0 = make_request(demand=1.0, priority=0.0, min_reliability=0, min_availability=0)
    assert aggregate_utility(req0, worst, None, w) == 0.0
    # components (0.975, 1.0, 0.8, 0.8)
    req = make_request(demand=1.0, budget=20.0, priority=0.8)
    res = make_resource(cost=0.5, reliability=1.0, availability=1.0, energy_eff=0.8)
    assert aggregate_utility(req, res, None, w) == pytest.approx(0.93, abs=1e-12)


def test_weights_validation():
    with pytest.raises(ValueError):
        UtilityWeights(0, 0, 0, 0)
    with pytest.raises(ValueError):
        UtilityWeights(-0.1, 0.5, 0.3, 0.3)


requests = st.builds(
    make_request, demand=st.floats(0.01, 1), budget=st.floats(0, 40), priority=unit,
    max_latency=st.floats(1, 300), location=st.tuples(st.floats(-100, 100), st.floats(-100, 100)))
resources = st.builds(
    make_resource, capacity=st.floats(0.5, 1), cost=st.floats(0, 5), reliability=unit,
    availability=unit, energy_eff=unit, location=st.tuples(st.floats(-100, 100), st.floats(-100, 100)))


@given(requests, resources, unit, st.floats(0, 2))
def test_component_scores_bounded(req, res, share, beta_f):
    hist = FairnessHistory(allocation_share={req.id: share}, rounds_observed=1)
    for s in (cost_score(req, res), qos_score(req, res), energy_score(res), fairness_score(req, hist, beta_f)):
        assert 0.0 <= s <= 1.0
    assert 0.0 <= aggregate_utility(req, res, hist, UtilityWeights(), beta_f) <= 1.0 + 1e-12


@given(requests, resources)
def test_cost_only_weights_reduce_to_cost_score(req, res):
    assert aggregate_utility(req, res, None, UtilityWeights(1, 0, 0, 0)) == cost_score(req, res)


@given(requests, resources, st.floats(0, 1))
def test_aggregate_monotone_in_energy_component(req, res, bump):
    w = UtilityWeights()
    better = make_resource(res.id, res.capacity, res.cost, res.reliability, res.availability,
                           min(1.0, res.energy_eff + bump), res.location)
    assert aggregate_utility(req, better, None, w) >= aggregate_utility(req, res, None, w)


def test_vectorized_matrix_matches_scalar(market_instance):
    inst = market_instance
    hist = FairnessHistory()
    hist.record_round({r.id for r in inst.requests[::3]}, [r.id for r in inst.requests])
    w = UtilityWeights()
    mat = utility_matrix(inst.requests, inst.resources, hist, w, 0.5)
    scalar = np.array([[aggregate_utility(q, s, hist, w, 0.5) for s in inst.resources] for q in inst.requests])
    assert np.max(np.abs(mat - scalar)) < 1e-12
