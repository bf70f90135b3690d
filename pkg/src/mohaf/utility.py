"""Multi-objective pair utility: cost, QoS, energy and fairness scores and their weighted sum."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Sequence

import numpy as np

from .model import Request, Resource, latency

#: Penalty applied to a requester's historical win share inside the fairness score.
DEFAULT_FAIRNESS_PENALTY = 0.5


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class UtilityWeights:
    alpha: float = 0.4  # cost
    beta: float = 0.3  # QoS
    gamma: float = 0.1  # energy
    delta: float = 0.2  # fairness

    def __post_init__(self):
        ws = self.as_tuple()
        if any(w < 0 for w in ws):
            raise ValueError(f"utility weights must be non-negative, got {ws}")
        if sum(ws) <= 0:
            raise ValueError("utility weights must not all be zero")

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma, self.delta)


@dataclass
class FairnessHistory:
    """Per-requester fraction of past rounds in which the requester won an allocation."""

    allocation_share: Dict[str, float] = field(default_factory=dict)
    rounds_observed: int = 0
    wins: Dict[str, int] = field(default_factory=dict)

    def share(self, request_id) -> float:
        return self.allocation_share.get(request_id, 0.0)

    def record_round(self, allocated_ids: Iterable, all_ids: Iterable) -> None:
        """Fold one auction round into the history. Called by the round coordinator only."""
        self.rounds_observed += 1
        winners = set(allocated_ids)
        for rid in winners:
            self.wins[rid] = self.wins.get(rid, 0) + 1
        n = self.rounds_observed
        for rid in all_ids:
            self.allocation_share[rid] = self.wins.get(rid, 0) / n


def cost_score(req: Request, res: Resource) -> float:
    """Budget-relative cheapness: 1 when free, 0 when the bill reaches the budget."""
    if req.budget <= 0:
        return 0.0
    return _clamp01(1.0 - res.cost * req.demand / req.budget)


def qos_score(req: Request, res: Resource) -> float:
    lat_term = max(0.0, 1.0 - latency(req.location, res.location) / req.max_latency)
    return (res.reliability + res.availability + lat_term) / 3.0


def energy_score(res: Resource) -> float:
    return res.energy_eff


def fairness_score(req: Request, hist: FairnessHistory | None,
                   beta_f: float = DEFAULT_FAIRNESS_PENALTY) -> float:
    share = hist.share(req.id) if hist is not None else 0.0
    return _clamp01(req.priority - beta_f * share)


def aggregate_utility(req: Request, res: Resource, hist: FairnessHistory | None,
                      weights: UtilityWeights = UtilityWeights(),
                      beta_f: float = DEFAULT_FAIRNESS_PENALTY) -> float:
    return (
        weights.alpha * cost_score(req, res)
        + weights.beta * qos_score(req, res)
        + weights.gamma * energy_score(res)
        + weights.delta * fairness_score(req, hist, beta_f)
    )


def utility_matrix(requests: Sequence[Request], resources: Sequence[Resource],
                   hist: FairnessHistory | None, weights: UtilityWeights = UtilityWeights(),
                   beta_f: float = DEFAULT_FAIRNESS_PENALTY,
                   dist: np.ndarray | None = None) -> np.ndarray:
    """Aggregate utility for every (request, resource) pair, shape ``(N, M)``.

    Same arithmetic as :func:`aggregate_utility`, vectorized.
    """
    demand = np.array([r.demand for r in requests], dtype=float)
    budget = np.array([r.budget for r in requests], dtype=float)
    prio = np.array([r.priority for r in requests], dtype=float)
    max_lat = np.array([r.max_latency for r in requests], dtype=float)
    share = np.array([hist.share(r.id) if hist is not None else 0.0 for r in requests], dtype=float)
    cost = np.array([s.cost for s in resources], dtype=float)
    rel = np.array([s.reliability for s in resources], dtype=float)
    avail = np.array([s.availability for s in resources], dtype=float)
    energy = np.array([s.energy_eff for s in resources], dtype=float)
    if dist is None:
        dist = distance_matrix(requests, resources)

    with np.errstate(divide="ignore", invalid="ignore"):
        u_cost = np.where(budget[:, None] > 0,
                          np.clip(1.0 - cost[None, :] * demand[:, None] / budget[:, None], 0.0, 1.0),
                          0.0)
    u_qos = (rel[None, :] + avail[None, :] + np.maximum(0.0, 1.0 - dist / max_lat[:, None])) / 3.0
    u_fair = np.clip(prio - beta_f * share, 0.0, 1.0)
    return (weights.alpha * u_cost + weights.beta * u_qos
            + weights.gamma * energy[None, :] + weights.delta * u_fair[:, None])


def distance_matrix(requests: Sequence[Request], resources: Sequence[Resource]) -> np.ndarray:
    a = np.array([r.location for r in requests], dtype=float).reshape(-1, 2)
    b = np.array([s.location for s in resources], dtype=float).reshape(-1, 2)
    return np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
