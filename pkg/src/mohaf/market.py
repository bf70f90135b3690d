"""Dense (request x resource) tables shared by every mechanism."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import CAPACITY_TOL, Instance, latency
from .pricing import PricingState
from .utility import DEFAULT_FAIRNESS_PENALTY, FairnessHistory, UtilityWeights, distance_matrix, utility_matrix


@dataclass
class MarketTables:
    utility: np.ndarray  # (N, M) aggregate utility
    ask: np.ndarray  # (N, M) uncapped asking price at current unit prices
    price: np.ndarray  # (N, M) transaction price, ask capped at budget
    static_ok: np.ndarray  # (N, M) QoS holds and demand fits an empty resource
    budget_ok: np.ndarray  # (N, M) ask within budget
    demand: np.ndarray  # (N,)
    capacity: np.ndarray  # (M,)

    @property
    def feasible_empty(self) -> np.ndarray:
        return self.static_ok & self.budget_ok


def market_tables(inst: Instance, prices: Optional[PricingState] = None,
                  hist: Optional[FairnessHistory] = None,
                  uw: UtilityWeights = UtilityWeights(),
                  beta_f: float = DEFAULT_FAIRNESS_PENALTY) -> MarketTables:
    reqs, ress = inst.requests, inst.resources
    dist = distance_matrix(reqs, ress)
    util = utility_matrix(reqs, ress, hist, uw, beta_f, dist=dist)

    demand = np.array([r.demand for r in reqs], dtype=float)
    budget = np.array([r.budget for r in reqs], dtype=float)
    max_lat = np.array([r.max_latency for r in reqs], dtype=float)
    min_rel = np.array([r.min_reliability for r in reqs], dtype=float)
    min_av = np.array([r.min_availability for r in reqs], dtype=float)
    cap = np.array([s.capacity for s in ress], dtype=float)
    rel = np.array([s.reliability for s in ress], dtype=float)
    av = np.array([s.availability for s in ress], dtype=float)
    if prices is None:
        rho = np.array([s.cost for s in ress], dtype=float)
    else:
        rho = np.array([prices.rho(s) for s in ress], dtype=float)

    lat_ok = dist <= max_lat[:, None]
    # Near the latency boundary defer to the scalar metric used by validate().
    near = np.abs(dist - max_lat[:, None]) <= 1e-9 * max_lat[:, None]
    for i, j in zip(*np.nonzero(near)):
        lat_ok[i, j] = latency(reqs[i].location, ress[j].location) <= reqs[i].max_latency

    static_ok = (
        (demand[:, None] <= cap[None, :] + CAPACITY_TOL)
        & (rel[None, :] >= min_rel[:, None])
        & (av[None, :] >= min_av[:, None])
        & lat_ok
    )
    ask = rho[None, :] * demand[:, None] * (0.8 + 0.4 * util)
    return MarketTables(
        utility=util,
        ask=ask,
        price=np.minimum(ask, budget[:, None]),
        static_ok=static_ok,
        budget_ok=ask <= budget[:, None],
        demand=demand,
        capacity=cap,
    )
