import pytest
from hypothesis import given, strategies as st

from mohaf import (Instance, PricingConfig, PricingState, check_convergence, run_pricing_rounds,
                   stationary_instance, transaction_price, update_price)
from mohaf.pricing import CONSTANT, RoundRecord, log_to_csv

from conftest import make_request, make_resource


def _state(rho, round_=0):
    return PricingState(price={"s0": rho}, round=round_)


def test_update_price_examples():
    res = make_resource(capacity=1.0)
    const = PricingConfig(eta0=0.1, step_schedule=CONSTANT)
    assert update_price(_state(1.0), res, 1.0, const) == pytest.approx(1.02, abs=1e-12)
    assert update_price(_state(1.7), res, 0.8, const) == 1.7
    assert update_price(_state(9.99), make_resource(capacity=1.0), 1.0, PricingConfig(eta0=2.5, step_schedule=CONSTANT)) == 10.0


def test_inverse_sqrt_step():
    cfg = PricingConfig(eta0=0.1)
    assert cfg.step(0) == 0.1 and cfg.step(3) == pytest.approx(0.05)
    assert update_price(_state(1.0, 3), make_resource(), 1.0, cfg) == pytest.approx(1.01, abs=1e-12)


def test_update_rejects_overfull_resource():
    with pytest.raises(ValueError):
        update_price(_state(1.0), make_resource(capacity=0.5), 0.6)


def test_transaction_price_examples():
    assert transaction_price(1.0, make_request(demand=1.0, budget=20), 0.5) == pytest.approx(1.0, abs=1e-12)
    assert transaction_price(1.0, make_request(demand=1.0, budget=1.0), 1.0) == 1.0
    assert transaction_price(1.0, make_request(demand=1.0, budget=20), 0.0) == pytest.approx(0.8, abs=1e-12)


@given(st.floats(0, 10), st.floats(0.01, 1), st.floats(0, 30), st.floats(0, 1), st.floats(0, 1), st.floats(0, 5))
def test_transaction_price_bounded_and_monotone(rho, demand, budget, u, du, drho):
    req = make_request(demand=demand, budget=budget)
    p = transaction_price(rho, req, u)
    assert 0 <= p <= budget
    assert transaction_price(rho, req, min(1.0, u + du)) >= p
    assert transaction_price(rho + drho, req, u) >= p


@pytest.mark.parametrize("kwargs", [
    {"rho_min": 2.0, "rho_max": 1.0}, {"tau": 1.0}, {"tau": 0.0}, {"eta0": 0.0}, {"step_schedule": "cubic"},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        PricingConfig(**kwargs)


def _single_market():
    return Instance(resources=(make_resource("s0", cost=0.5),),
                    requests=tuple(make_request(f"q{k}", demand=0.3, budget=5.0) for k in range(2)))


def test_single_round_log():
    inst = _single_market()
    state = PricingState.initial(inst)
    log = run_pricing_rounds(inst, "mohaf", rounds=1, state=state)
    assert len(log) == 1
    assert log[0].price == {"s0": 0.5}
    assert log[0].utilization["s0"] == pytest.approx(0.6)
    assert state.price["s0"] == pytest.approx(0.5 + 0.1 * (0.6 - 0.8))
    assert state.round == 1


def test_idle_market_prices_fall_to_floor():
    inst = Instance(resources=(make_resource("s0", cost=0.5), make_resource("s1", cost=0.7)), requests=())
    cfg = PricingConfig()
    log = run_pricing_rounds(inst, "mohaf", cfg, rounds=200)
    drops = [b.price["s0"] - a.price["s0"] for a, b in zip(log, log[1:])]
    assert all(d <= 0 for d in drops)
    state = PricingState.initial(inst)
    run_pricing_rounds(inst, "mohaf", cfg, rounds=200, state=state)
    assert state.price == {"s0": cfg.rho_min, "s1": cfg.rho_min}


@pytest.mark.parametrize("mech", ["mohaf", "greedy_priority", "first_price", "random"])
def test_prices_stay_in_band(mech):
    cfg = PricingConfig(eta0=3.0, step_schedule=CONSTANT)
    for rec in run_pricing_rounds(stationary_instance(), mech, cfg, rounds=150):
        assert all(cfg.rho_min <= p <= cfg.rho_max for p in rec.price.values())


def test_fixed_point_at_target_utilization():
    inst = Instance(resources=(make_resource("s0", capacity=1.0),),
                    requests=tuple(make_request(f"q{k}", demand=0.4, budget=50.0) for k in range(2)))
    cfg = PricingConfig(tau=0.8)
    log = run_pricing_rounds(inst, "mohaf", cfg, rounds=20)
    assert {rec.price["s0"] for rec in log} == {0.5}


def _records(prices, utils, revenues):
    return [RoundRecord(t, {"s0": p}, {"s0": u}, r) for t, (p, u, r) in enumerate(zip(prices, utils, revenues))]


def test_convergence_report_examples():
    flat = check_convergence(_records([1.0] * 10, [0.8] * 10, [3.0] * 10), window=10)
    assert flat.price_stable and flat.utilization_stable and flat.revenue_stable
    wobble = check_convergence(_records([1.0, 1.01] * 5, [0.8] * 10, [3.0] * 10), window=10)
    assert not wobble.price_stable and wobble.utilization_stable
    assert set(flat.to_dict()) >= {"price_stable", "utilization_stable", "revenue_stable"}
    with pytest.raises(ValueError):
        check_convergence(_records([1.0], [0.8], [1.0]), window=2)


def test_stationary_instance_converges():
    cfg = PricingConfig()
    log = run_pricing_rounds(stationary_instance(), "mohaf", cfg, rounds=3000)
    report = check_convergence(log, 1000, cfg)
    assert report.price_stable and report.utilization_stable and report.revenue_stable


def test_log_csv_columns():
    text = log_to_csv(_records([1.0], [0.8], [2.0]))
    assert text.splitlines()[0] == "round,resource_id,price,utilization,revenue"
    assert text.splitlines()[1] == "0,s0,1.0,0.8,2.0"
