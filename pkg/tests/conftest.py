import numpy as np
import pytest

from mohaf import GenerationConfig, Request, Resource, build_instance


def make_resource(rid="s0", capacity=1.0, cost=0.5, reliability=0.99, availability=0.99,
                  energy_eff=0.8, location=(0.0, 0.0)):
    return Resource(id=rid, capacity=capacity, cost=cost, reliability=reliability,
                    availability=availability, energy_eff=energy_eff, location=location)


def make_request(qid="q0", demand=0.1, budget=20.0, priority=0.8, min_reliability=0.95,
                 min_availability=0.95, max_latency=150.0, location=(0.0, 0.0)):
    return Request(id=qid, demand=demand, budget=budget, priority=priority,
                   min_reliability=min_reliability, min_availability=min_availability,
                   max_latency=max_latency, location=location)


def small_instance(seed, n_max=7, m_max=3):
    """Paper-generator instance with N ~ U{1..n_max}, M ~ U{1..m_max} drawn from ``seed``."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    return build_instance(GenerationConfig(n, m, seed))


@pytest.fixture
def market_instance():
    return build_instance(GenerationConfig(200, 50, 11))


ACCEPTANCE_LINES = {}


@pytest.fixture
def report():
    """Record one acceptance line: report(number, passed, detail)."""
    def record(number, passed, detail):
        ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
