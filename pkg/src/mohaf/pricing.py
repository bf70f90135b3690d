"""Utilization-driven unit pricing, transaction pricing and multi-round price simulation."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Union

import numpy as np

from .model import CAPACITY_TOL, AllocationSet, Instance, Request, Resource
from .utility import FairnessHistory

CONSTANT = "constant"
INVERSE_SQRT = "inverse_sqrt"

PRICE_TOL = 1e-6
UTILIZATION_TOL = 0.05
REVENUE_REL_SPREAD = 0.01


@dataclass(frozen=True)
class PricingConfig:
    rho_min: float = 0.1
    rho_max: float = 10.0
    tau: float = 0.8
    eta0: float = 0.1
    step_schedule: str = INVERSE_SQRT

    def __post_init__(self):
        if not 0 < self.rho_min < self.rho_max:
            raise ValueError("need 0 < rho_min < rho_max")
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")
        if not self.eta0 > 0:
            raise ValueError("eta0 must be positive")
        if self.step_schedule not in (CONSTANT, INVERSE_SQRT):
            raise ValueError(f"unknown step schedule {self.step_schedule!r}")

    def step(self, round_index: int) -> float:
        if self.step_schedule == CONSTANT:
            return self.eta0
        return self.eta0 / math.sqrt(round_index + 1)

    def project(self, rho: float) -> float:
        return min(self.rho_max, max(self.rho_min, rho))


@dataclass
class PricingState:
    price: Dict[str, float] = field(default_factory=dict)
    round: int = 0
    last_utilization: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def initial(cls, inst: Instance, cfg: PricingConfig = PricingConfig()) -> "PricingState":
        """Start every resource at its own unit cost, projected into the price band."""
        return cls(price={r.id: cfg.project(r.cost) for r in inst.resources})

    def rho(self, res: Resource) -> float:
        return self.price.get(res.id, res.cost)


def update_price(state: PricingState, res: Resource, utilization: float,
                 cfg: PricingConfig = PricingConfig()) -> float:
    """Projected gradient step on the price of ``res`` given its used capacity this round."""
    if utilization > res.capacity + CAPACITY_TOL:
        raise ValueError(f"utilization {utilization} exceeds capacity of {res.id!r}")
    drive = utilization / res.capacity - cfg.tau
    return cfg.project(state.rho(res) + cfg.step(state.round) * drive)


def asking_price(rho: float, req: Request, utility: float) -> float:
    """Utility-scaled price before the budget cap."""
    return rho * req.demand * (0.8 + 0.4 * utility)


def transaction_price(rho: float, req: Request, utility: float) -> float:
    return min(asking_price(rho, req, utility), req.budget)


@dataclass
class RoundRecord:
    round: int
    price: Dict[str, float]  # price in force during the round
    utilization: Dict[str, float]  # used / capacity after the round's allocation
    revenue: float


@dataclass
class ConvergenceReport:
    window: int
    price_stable: bool
    utilization_stable: bool
    revenue_stable: bool
    max_price_delta: float
    max_utilization_gap: float
    revenue_rel_spread: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


Mechanism = Callable[..., AllocationSet]


def run_pricing_rounds(inst: Instance, mechanism: Union[str, Mechanism],
                       cfg: PricingConfig = PricingConfig(), rounds: int = 1000,
                       seed: int = 0, state: Optional[PricingState] = None,
                       hist: Optional[FairnessHistory] = None,
                       **mechanism_kwargs) -> List[RoundRecord]:
    """Run ``mechanism`` repeatedly on ``inst``, re-pricing every resource after each round.

    ``mechanism`` is a registered mechanism name or a callable with the signature
    ``(inst, prices=..., hist=..., seed=..., **kwargs) -> AllocationSet``. Round
    ``t`` uses seed ``seed + t`` so randomized mechanisms vary between rounds.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if isinstance(mechanism, str):
        from .mechanisms import get_mechanism
        mechanism = get_mechanism(mechanism)
    state = state if state is not None else PricingState.initial(inst, cfg)
    hist = hist if hist is not None else FairnessHistory()
    all_ids = [r.id for r in inst.requests]

    log: List[RoundRecord] = []
    for t in range(rounds):
        alloc = mechanism(inst, prices=state, hist=hist, seed=seed + t, **mechanism_kwargs)
        util = {r.id: alloc.used(r.id) / r.capacity for r in inst.resources}
        revenue = math.fsum(p.price for p in alloc.pairs)
        log.append(RoundRecord(state.round, dict(state.price), util, revenue))

        new_prices = {r.id: update_price(state, r, min(alloc.used(r.id), r.capacity), cfg)
                      for r in inst.resources}
        state.price.update(new_prices)
        state.last_utilization = util
        state.round += 1
        hist.record_round((p.request_id for p in alloc.pairs), all_ids)
    return log


def check_convergence(log: List[RoundRecord], window: int = 1000,
                      cfg: PricingConfig = PricingConfig()) -> ConvergenceReport:
    """Operational stability of the last ``window`` rounds of a price log."""
    if window < 1 or len(log) < window:
        raise ValueError(f"log of length {len(log)} is shorter than window {window}")
    tail = log[-window:]
    ids = list(tail[0].price)

    prices = np.array([[rec.price[i] for i in ids] for rec in tail]).reshape(len(tail), len(ids))
    deltas = np.abs(np.diff(prices, axis=0))
    max_delta = float(deltas.max()) if deltas.size else 0.0

    util = np.array([[rec.utilization[i] for i in ids] for rec in tail]).reshape(len(tail), len(ids))
    max_gap = float(np.abs(util - cfg.tau).max()) if util.size else 0.0

    rev = np.array([rec.revenue for rec in tail])
    scale = abs(rev.mean())
    spread = float((rev.max() - rev.min()) / scale) if scale > 0 else float(rev.max() - rev.min())

    return ConvergenceReport(
        window=window,
        price_stable=max_delta < PRICE_TOL,
        utilization_stable=max_gap < UTILIZATION_TOL,
        revenue_stable=spread < REVENUE_REL_SPREAD,
        max_price_delta=max_delta,
        max_utilization_gap=max_gap,
        revenue_rel_spread=spread,
    )


def log_to_csv(log: List[RoundRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["round", "resource_id", "price", "utilization", "revenue"])
    for rec in log:
        for rid, price in rec.price.items():
            writer.writerow([rec.round, rid, repr(price), repr(rec.utilization[rid]), repr(rec.revenue)])
    return buf.getvalue()
