"""The MOHAF mechanism: bid enumeration, greedy marginal-gain selection and
k-means hierarchical decomposition, plus an exhaustive oracle for small cases."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from .market import market_tables
from .model import CAPACITY_TOL, AllocationSet, Instance
from .objective import ObjectiveWeights, pair_gain
from .pricing import PricingState
from .utility import DEFAULT_FAIRNESS_PENALTY, FairnessHistory, UtilityWeights


class InstanceTooLargeError(ValueError):
    pass


class Bid(NamedTuple):
    request_id: str
    resource_id: str
    utility: float
    tentative_price: float


def enumerate_bids(inst: Instance, prices: Optional[PricingState] = None,
                   hist: Optional[FairnessHistory] = None,
                   uw: UtilityWeights = UtilityWeights(),
                   beta_f: float = DEFAULT_FAIRNESS_PENALTY) -> List[Bid]:
    """All (request, resource) pairs feasible on an empty market, request-major.

    A pair qualifies when the resource alone can hold the demand, QoS
    thresholds hold, and the uncapped asking price fits the budget.
    """
    reqs, ress = inst.requests, inst.resources
    if not reqs or not ress:
        return []
    t = market_tables(inst, prices, hist, uw, beta_f)
    ii, jj = np.nonzero(t.feasible_empty)  # row-major: request-major, resource-minor
    return [
        Bid(reqs[i].id, ress[j].id, u, p)
        for i, j, u, p in zip(ii.tolist(), jj.tolist(), t.utility[ii, jj].tolist(),
                              t.price[ii, jj].tolist())
    ]


def greedy_allocate(inst: Instance, bids: Sequence[Bid],
                    ow: ObjectiveWeights = ObjectiveWeights()) -> AllocationSet:
    """Repeatedly take the feasible bid of largest marginal gain.

    Lazy evaluation over a max-heap keyed by (-gain, request_id, resource_id):
    a popped bid whose request is already served or whose resource no longer
    fits it is discarded for good (capacity only shrinks); otherwise its gain is
    re-evaluated and, if it went stale, pushed back.
    """
    alloc = AllocationSet()
    if not bids:
        return alloc
    # Integer ranks preserve the lexicographic id tie-break at a fraction of the compare cost.
    req_rank = {rid: n for n, rid in enumerate(sorted(r.id for r in inst.requests))}
    res_rank = {rid: n for n, rid in enumerate(sorted(s.id for s in inst.resources))}
    reqs = sorted(inst.requests, key=lambda r: req_rank[r.id])
    ress = sorted(inst.resources, key=lambda s: res_rank[s.id])

    bi = np.fromiter((req_rank[b.request_id] for b in bids), dtype=np.int64, count=len(bids))
    bj = np.fromiter((res_rank[b.resource_id] for b in bids), dtype=np.int64, count=len(bids))
    util = np.fromiter((b.utility for b in bids), dtype=float, count=len(bids))
    eff = np.array([s.energy_eff for s in ress])[bj]
    gains = ow.theta1 * util + ow.theta2 * np.sqrt(np.maximum(util, 0.0)) + ow.theta3 * eff
    heap = list(zip((-gains).tolist(), bi.tolist(), bj.tolist(), range(len(bids))))
    heapq.heapify(heap)

    assigned = [False] * len(reqs)
    remaining = [s.capacity + CAPACITY_TOL for s in ress]
    demand = [r.demand for r in reqs]
    while heap:
        neg_gain, i, j, k = heapq.heappop(heap)
        if assigned[i] or demand[i] > remaining[j]:
            continue
        bid = bids[k]
        gain = pair_gain(bid.utility, ress[j].energy_eff, ow)
        if gain < -neg_gain:
            heapq.heappush(heap, (-gain, i, j, k))
            continue
        if gain <= 0:
            break
        alloc.assign(reqs[i], ress[j], bid.tentative_price, bid.utility)
        assigned[i] = True
        remaining[j] -= demand[i]
    return alloc


def brute_force_allocate(inst: Instance, bids: Sequence[Bid],
                         ow: ObjectiveWeights = ObjectiveWeights(),
                         max_requests: int = 10, max_resources: int = 4) -> AllocationSet:
    """Exact maximizer of the objective over every feasible assignment of the bids."""
    if len(inst.requests) > max_requests or len(inst.resources) > max_resources:
        raise InstanceTooLargeError(
            f"exhaustive search limited to {max_requests} requests and {max_resources} "
            f"resources, got {len(inst.requests)} x {len(inst.resources)}")

    options: Dict[str, List[Bid]] = {r.id: [] for r in inst.requests}
    for b in bids:
        options[b.request_id].append(b)
    order = [r for r in inst.requests if options[r.id]]
    cap = {s.id: s.capacity for s in inst.resources}
    energy = {s.id: s.energy_eff for s in inst.resources}
    used = {s.id: 0.0 for s in inst.resources}

    best_value = -math.inf
    best: List[Bid] = []
    chosen: List[Bid] = []

    def search(pos: int, value: float) -> None:
        nonlocal best_value, best
        if pos == len(order):
            if value > best_value:
                best_value, best = value, list(chosen)
            return
        req = order[pos]
        search(pos + 1, value)
        for b in options[req.id]:
            if used[b.resource_id] + req.demand <= cap[b.resource_id] + CAPACITY_TOL:
                used[b.resource_id] += req.demand
                chosen.append(b)
                search(pos + 1, value + ow.theta1 * b.utility + ow.theta2 * math.sqrt(b.utility)
                       + ow.theta3 * energy[b.resource_id])
                chosen.pop()
                used[b.resource_id] -= req.demand

    search(0, 0.0)
    alloc = AllocationSet()
    for b in best:
        alloc.assign(inst.request(b.request_id), inst.resource(b.resource_id),
                     b.tentative_price, b.utility)
    return alloc


@dataclass
class ClusterPlan:
    k: int
    resource_assignment: Dict[str, int]
    request_assignment: Dict[str, int]
    centroids: List[List[float]]
    iterations: int = 0


def _minmax(a: np.ndarray) -> tuple:
    lo, hi = a.min(axis=0), a.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return lo, span


def _kmeanspp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = [x[rng.integers(len(x))]]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        idx = rng.choice(len(x), p=d2 / total) if total > 0 else rng.integers(len(x))
        centers.append(x[idx])
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def kmeans_cluster(inst: Instance, k: int, max_iters: int = 100, seed: int = 0) -> ClusterPlan:
    """Lloyd's k-means over resources, then attach each request to its nearest centroid.

    Resource features are (x, y, cost, capacity), each min-max scaled to [0, 1].
    Requests are matched on location only, using the resources' location scaling.
    """
    m = len(inst.resources)
    if k <= 0:
        raise ValueError("k must be positive")
    if k > m:
        raise ValueError(f"k={k} exceeds the number of resources ({m})")
    if max_iters <= 0:
        raise ValueError("max_iters must be positive")

    raw = np.array([[s.location[0], s.location[1], s.cost, s.capacity] for s in inst.resources])
    lo, span = _minmax(raw)
    x = (raw - lo) / span
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp(x, k, rng)

    iters = 0
    for iters in range(1, max_iters + 1):
        labels = _nearest(x, centroids)
        new = centroids.copy()
        for c in range(k):
            members = x[labels == c]
            if len(members):
                new[c] = members.mean(axis=0)
        shift = float(np.sqrt(((new - centroids) ** 2).sum(axis=1)).max())
        centroids = new
        if shift < 1e-6:
            break
    labels = _nearest(x, centroids)

    if inst.requests:
        req_xy = (np.array([r.location for r in inst.requests]) - lo[:2]) / span[:2]
        req_labels = _nearest(req_xy, centroids[:, :2])
    else:
        req_labels = np.zeros(0, dtype=int)

    return ClusterPlan(
        k=k,
        resource_assignment={s.id: int(c) for s, c in zip(inst.resources, labels)},
        request_assignment={r.id: int(c) for r, c in zip(inst.requests, req_labels)},
        centroids=centroids.tolist(),
        iterations=iters,
    )


def _nearest(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


@dataclass(frozen=True)
class ClusterConfig:
    threshold: int = 200  # cluster only when there are more resources than this
    k: Optional[int] = None  # None: floor(sqrt(M))
    max_iters: int = 100
    seed: int = 0

    def clusters_for(self, m: int) -> int:
        return self.k if self.k is not None else max(1, math.isqrt(m))


def hierarchical_allocate(inst: Instance, prices: Optional[PricingState] = None,
                          hist: Optional[FairnessHistory] = None,
                          uw: UtilityWeights = UtilityWeights(),
                          ow: ObjectiveWeights = ObjectiveWeights(),
                          cluster_cfg: ClusterConfig = ClusterConfig(),
                          beta_f: float = DEFAULT_FAIRNESS_PENALTY,
                          stats: Optional[dict] = None) -> AllocationSet:
    """Flat greedy on small markets; above the threshold, independent greedy runs per k-means cluster.

    Requests only bid on resources of their own cluster. ``stats``, if given,
    receives ``n_bids`` and ``n_clusters``.
    """
    m = len(inst.resources)
    if m <= cluster_cfg.threshold:
        bids = enumerate_bids(inst, prices, hist, uw, beta_f)
        if stats is not None:
            stats.update(n_bids=len(bids), n_clusters=0)
        return greedy_allocate(inst, bids, ow)

    k = cluster_cfg.clusters_for(m)
    plan = kmeans_cluster(inst, k, cluster_cfg.max_iters, cluster_cfg.seed)
    res_groups = [[] for _ in range(k)]
    req_groups = [[] for _ in range(k)]
    for s in inst.resources:
        res_groups[plan.resource_assignment[s.id]].append(s)
    for r in inst.requests:
        req_groups[plan.request_assignment[r.id]].append(r)

    merged = AllocationSet()
    n_bids = 0
    for c in range(k):
        if not res_groups[c] or not req_groups[c]:
            continue
        sub = Instance(resources=tuple(res_groups[c]), requests=tuple(req_groups[c]))
        bids = enumerate_bids(sub, prices, hist, uw, beta_f)
        n_bids += len(bids)
        merged.merge(greedy_allocate(sub, bids, ow))
    if stats is not None:
        stats.update(n_bids=n_bids, n_clusters=k)
    return merged

