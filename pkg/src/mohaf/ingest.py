"""Cluster-trace job events to auction instances.

Requests come from job submission events (or synthetic stand-ins); resources
are always synthetic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .model import (DEFAULT_MAX_LATENCY, DEFAULT_MIN_AVAILABILITY, DEFAULT_MIN_RELIABILITY,
                    Instance, Request, Resource)

log = logging.getLogger(__name__)

SUBMIT = 0
FIELDS = ("timestamp", "job_id", "event_type", "scheduling_class", "priority")
IDENTITY_COLUMNS: Dict[str, int] = {name: i for i, name in enumerate(FIELDS)}

#: Demand for scheduling class 0, which would otherwise map to zero demand.
CLASS0_DEMAND = 1.0 / 6.0
LOCATION_RANGE = (-100.0, 100.0)

QosDefaults = Tuple[float, float, float]
DEFAULT_QOS: QosDefaults = (DEFAULT_MIN_RELIABILITY, DEFAULT_MIN_AVAILABILITY, DEFAULT_MAX_LATENCY)


class TraceError(Exception):
    """The trace could not be read, or ran out of submission events."""


@dataclass(frozen=True)
class JobEvent:
    timestamp: int
    job_id: int
    event_type: int
    scheduling_class: int
    priority: int


class EventList(list):
    """Parsed submission events; ``malformed`` counts the rows that were skipped."""

    malformed: int = 0


def parse_columns(spec: str) -> Dict[str, int]:
    """Parse ``"timestamp=0,job_id=2,..."`` into a column map, defaulting unnamed fields."""
    cols = dict(IDENTITY_COLUMNS)
    for part in filter(None, (p.strip() for p in spec.split(","))):
        name, _, idx = part.partition("=")
        name = name.strip()
        if name not in cols:
            raise ValueError(f"unknown trace field {name!r}; expected one of {FIELDS}")
        cols[name] = int(idx)
    return cols


def parse_job_events(lines: Union[Iterable[str], str, Path],
                     column_map: Optional[Dict[str, int]] = None) -> EventList:
    """Read submission events from comma-separated trace rows.

    Accepts an iterable of lines or a path. Rows that fail to parse are skipped
    and counted; scheduling class and priority are clamped to [0, 3] and [0, 10].
    """
    cols = dict(IDENTITY_COLUMNS, **(column_map or {}))
    if isinstance(lines, (str, Path)):
        try:
            lines = Path(lines).read_text(encoding="utf-8").splitlines()
        except (OSError, UnicodeDecodeError) as exc:
            raise TraceError(f"cannot read trace {lines}: {exc}") from exc

    events = EventList()
    try:
        for line in lines:
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                values = {name: int(float(cells[idx])) for name, idx in cols.items()}
            except (IndexError, ValueError):
                events.malformed += 1
                continue
            if values["event_type"] != SUBMIT:
                continue
            values["scheduling_class"] = min(3, max(0, values["scheduling_class"]))
            values["priority"] = min(10, max(0, values["priority"]))
            events.append(JobEvent(**values))
    except (OSError, UnicodeDecodeError) as exc:
        raise TraceError(f"trace stream failed: {exc}") from exc
    if events.malformed:
        log.warning("skipped %d malformed trace rows", events.malformed)
    return events


def request_from_job(e: JobEvent, rng: np.random.Generator, qos_defaults: QosDefaults = DEFAULT_QOS,
                     request_id: Optional[str] = None) -> Request:
    """Map a submission event to a request; draws the location from ``rng``."""
    demand = e.scheduling_class / 3.0 if e.scheduling_class > 0 else CLASS0_DEMAND
    priority = e.priority / 10.0
    x, y = rng.uniform(*LOCATION_RANGE, size=2)
    min_rel, min_avail, max_lat = qos_defaults
    return Request(
        id=request_id if request_id is not None else f"job{e.job_id}",
        demand=demand,
        budget=demand * 20 + priority * 5,
        priority=priority,
        min_reliability=min_rel,
        min_availability=min_avail,
        max_latency=max_lat,
        location=(float(x), float(y)),
    )


def generate_resources(n: int, seed: Union[int, np.random.Generator] = 0) -> List[Resource]:
    if n < 1:
        raise ValueError("need at least one resource")
    rng = np.random.default_rng(seed)
    capacity = rng.uniform(0.5, 1.0, n)
    cost = rng.uniform(0.3, 0.8, n)
    reliability = rng.uniform(0.95, 1.0, n)
    availability = rng.uniform(0.95, 1.0, n)
    energy = rng.uniform(0.6, 0.9, n)
    loc = rng.uniform(*LOCATION_RANGE, size=(n, 2))
    width = max(5, len(str(n - 1)))
    return [
        Resource(id=f"s{j:0{width}d}", capacity=float(capacity[j]), cost=float(cost[j]),
                 reliability=float(reliability[j]), availability=float(availability[j]),
                 energy_eff=float(energy[j]), location=(float(loc[j, 0]), float(loc[j, 1])))
        for j in range(n)
    ]


@dataclass(frozen=True)
class GenerationConfig:
    n_requests: int = 1000
    n_resources: int = 250
    seed: int = 0
    qos_defaults: QosDefaults = DEFAULT_QOS

    def __post_init__(self):
        if self.n_requests < 1 or self.n_resources < 1:
            raise ValueError("n_requests and n_resources must be >= 1")
        object.__setattr__(self, "qos_defaults", tuple(self.qos_defaults))


def synthetic_events(n: int, rng: np.random.Generator) -> List[JobEvent]:
    classes = rng.integers(0, 4, n)
    prios = rng.integers(0, 11, n)
    return [JobEvent(timestamp=0, job_id=i, event_type=SUBMIT,
                     scheduling_class=int(c), priority=int(p))
            for i, (c, p) in enumerate(zip(classes, prios))]


def build_instance(cfg: GenerationConfig, events: Optional[Sequence[JobEvent]] = None) -> Instance:
    """Instance from the first ``n_requests`` submission events, or synthetic ones if ``events`` is None.

    Request and resource draws come from independent child streams of ``cfg.seed``.
    """
    req_ss, res_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    req_rng = np.random.default_rng(req_ss)
    if events is None:
        chosen = synthetic_events(cfg.n_requests, req_rng)
    else:
        chosen = [e for e in events if e.event_type == SUBMIT][: cfg.n_requests]
        if len(chosen) < cfg.n_requests:
            raise TraceError(
                f"trace has {len(chosen)} submission events, {cfg.n_requests} requested "
                f"(short by {cfg.n_requests - len(chosen)})")
    width = max(5, len(str(cfg.n_requests - 1)))
    requests = [request_from_job(e, req_rng, cfg.qos_defaults, request_id=f"q{i:0{width}d}")
                for i, e in enumerate(chosen)]
    resources = generate_resources(cfg.n_resources, np.random.default_rng(res_ss))
    return Instance(resources=tuple(resources), requests=tuple(requests))


def stationary_instance(n_markets: int = 3, per_market: int = 5, demand: float = 0.2,
                        low_budget: float = 0.25) -> Instance:
    """A fixed, oversubscribed market for price-convergence runs.

    Each of ``n_markets`` isolated unit-capacity resources is reachable only by
    its own ``per_market`` requests, whose total demand exceeds capacity times
    the default target utilization by one request. The cheapest-budget request
    in each market is priced out once the unit price climbs far enough, after
    which utilization sits exactly at 0.8 and prices stop moving.
    """
    resources, requests = [], []
    for g in range(n_markets):
        loc = (-80.0 + 160.0 * g / max(1, n_markets - 1), 0.0)
        resources.append(Resource(id=f"s{g:05d}", capacity=1.0, cost=0.5, reliability=0.99,
                                  availability=0.99, energy_eff=0.8, location=loc))
        for k in range(per_market):
            budget = low_budget + 0.05 * g if k == 0 else 2.0 + 0.5 * k
            requests.append(Request(id=f"q{g:02d}{k:03d}", demand=demand, budget=budget,
                                    priority=0.5, max_latency=10.0, location=loc))
    return Instance(resources=tuple(resources), requests=tuple(requests))
