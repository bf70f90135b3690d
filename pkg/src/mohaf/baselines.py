"""Comparison mechanisms: first-price, greedy-priority and random allocation.

All three serve requests one at a time in some order; they differ in the
order and in how a request picks among the resources that can still take it.
Every pair stores the same aggregate utility MOHAF would assign it, so the
efficiency metrics are comparable across mechanisms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .market import MarketTables, market_tables
from .model import CAPACITY_TOL, AllocationSet, Instance
from .pricing import PricingState
from .utility import DEFAULT_FAIRNESS_PENALTY, FairnessHistory, UtilityWeights


@dataclass(frozen=True)
class PriorityScoreWeights:
    w1: float = 0.5  # priority
    w2: float = 0.5  # budget, scaled by the largest budget in the instance

    def __post_init__(self):
        if self.w1 < 0 or self.w2 < 0 or self.w1 + self.w2 <= 0:
            raise ValueError("priority score weights must be non-negative and not both zero")


def first_price_order(inst: Instance) -> List[int]:
    """Request indices by descending bid (= budget), ties by id."""
    reqs = inst.requests
    return sorted(range(len(reqs)), key=lambda i: (-reqs[i].budget, reqs[i].id))


def priority_scores(inst: Instance, w: PriorityScoreWeights = PriorityScoreWeights()) -> List[float]:
    max_budget = max((r.budget for r in inst.requests), default=0.0)
    scale = max_budget if max_budget > 0 else 1.0
    return [w.w1 * r.priority + w.w2 * (r.budget / scale) for r in inst.requests]


def priority_order(inst: Instance, w: PriorityScoreWeights = PriorityScoreWeights()) -> List[int]:
    reqs = inst.requests
    scores = priority_scores(inst, w)
    return sorted(range(len(reqs)), key=lambda i: (-scores[i], reqs[i].id))


def _open_slots(t: MarketTables, remaining: np.ndarray, i: int, need_budget: bool) -> np.ndarray:
    ok = t.static_ok[i] & (t.demand[i] <= remaining + CAPACITY_TOL)
    if need_budget:
        ok &= t.budget_ok[i]
    return np.flatnonzero(ok)


def _lowest_id(inst: Instance, idx) -> int:
    return min(idx, key=lambda j: inst.resources[j].id)


def first_price_auction(inst: Instance, seed: int = 0, prices: Optional[PricingState] = None,
                        hist: Optional[FairnessHistory] = None,
                        uw: UtilityWeights = UtilityWeights(),
                        beta_f: float = DEFAULT_FAIRNESS_PENALTY) -> AllocationSet:
    """Pay-your-bid auction where every request bids its whole budget.

    Requests are served by descending bid; each takes the cheapest resource that
    passes QoS and still has room. ``seed`` is accepted for interface symmetry.
    """
    alloc = AllocationSet()
    if not inst.requests or not inst.resources:
        return alloc
    t = market_tables(inst, prices, hist, uw, beta_f)
    cost = np.array([s.cost for s in inst.resources])
    remaining = t.capacity.copy()
    for i in first_price_order(inst):
        slots = _open_slots(t, remaining, i, need_budget=False)
        if not len(slots):
            continue
        best = slots[cost[slots] == cost[slots].min()]
        j = _lowest_id(inst, best)
        req, res = inst.requests[i], inst.resources[j]
        alloc.assign(req, res, req.budget, float(t.utility[i, j]))
        remaining[j] -= req.demand
    return alloc


def greedy_priority_auction(inst: Instance, w: PriorityScoreWeights = PriorityScoreWeights(),
                            seed: int = 0, prices: Optional[PricingState] = None,
                            hist: Optional[FairnessHistory] = None,
                            uw: UtilityWeights = UtilityWeights(),
                            beta_f: float = DEFAULT_FAIRNESS_PENALTY) -> AllocationSet:
    """Serve requests by descending w1*priority + w2*budget/max_budget.

    Each takes its highest-utility open resource and pays the transaction
    price at current unit prices.
    """
    alloc = AllocationSet()
    if not inst.requests or not inst.resources:
        return alloc
    t = market_tables(inst, prices, hist, uw, beta_f)
    remaining = t.capacity.copy()
    for i in priority_order(inst, w):
        slots = _open_slots(t, remaining, i, need_budget=True)
        if not len(slots):
            continue
        u = t.utility[i, slots]
        j = _lowest_id(inst, slots[u == u.max()])
        req, res = inst.requests[i], inst.resources[j]
        alloc.assign(req, res, float(t.price[i, j]), float(t.utility[i, j]))
        remaining[j] -= req.demand
    return alloc


def random_auction(inst: Instance, seed: int = 0, prices: Optional[PricingState] = None,
                   hist: Optional[FairnessHistory] = None,
                   uw: UtilityWeights = UtilityWeights(),
                   beta_f: float = DEFAULT_FAIRNESS_PENALTY) -> AllocationSet:
    alloc = AllocationSet()
    if not inst.requests or not inst.resources:
        return alloc
    rng = np.random.default_rng(seed)
    t = market_tables(inst, prices, hist, uw, beta_f)
    remaining = t.capacity.copy()
    for i in rng.permutation(len(inst.requests)).tolist():
        slots = _open_slots(t, remaining, i, need_budget=True)
        if not len(slots):
            continue
        j = int(slots[rng.integers(len(slots))])
        req, res = inst.requests[i], inst.resources[j]
        alloc.assign(req, res, float(t.price[i, j]), float(t.utility[i, j]))
        remaining[j] -= req.demand
    return alloc
