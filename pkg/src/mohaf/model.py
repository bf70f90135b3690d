"""Domain entities, feasibility rules and the instance/allocation file formats."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Tuple, Union

Location = Tuple[float, float]
PathLike = Union[str, Path]

#: Absolute slack on capacity comparisons, absorbs float accumulation of demands.
CAPACITY_TOL = 1e-9

DEFAULT_MIN_RELIABILITY = 0.95
DEFAULT_MIN_AVAILABILITY = 0.95
DEFAULT_MAX_LATENCY = 150.0


class UnknownIdError(KeyError):
    """An allocation references a request or resource absent from the instance."""


@dataclass(frozen=True)
class Resource:
    id: str
    capacity: float
    cost: float
    reliability: float
    availability: float
    energy_eff: float
    location: Location = (0.0, 0.0)

    def __post_init__(self):
        if not self.capacity > 0:
            raise ValueError(f"resource {self.id}: capacity must be positive")
        if self.cost < 0:
            raise ValueError(f"resource {self.id}: cost must be non-negative")
        for name in ("reliability", "availability", "energy_eff"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"resource {self.id}: {name}={value} outside [0, 1]")
        object.__setattr__(self, "location", (float(self.location[0]), float(self.location[1])))


@dataclass(frozen=True)
class Request:
    id: str
    demand: float
    budget: float
    priority: float
    min_reliability: float = DEFAULT_MIN_RELIABILITY
    min_availability: float = DEFAULT_MIN_AVAILABILITY
    max_latency: float = DEFAULT_MAX_LATENCY
    location: Location = (0.0, 0.0)

    def __post_init__(self):
        if not self.demand > 0:
            raise ValueError(f"request {self.id}: demand must be positive")
        if self.budget < 0:
            raise ValueError(f"request {self.id}: budget must be non-negative")
        if not 0.0 <= self.priority <= 1.0:
            raise ValueError(f"request {self.id}: priority={self.priority} outside [0, 1]")
        if not self.max_latency > 0:
            raise ValueError(f"request {self.id}: max_latency must be positive")
        object.__setattr__(self, "location", (float(self.location[0]), float(self.location[1])))


@dataclass(frozen=True)
class Instance:
    """An auction round: the resources on offer and the requests bidding for them.

    Immutable, so it can be shared read-only between worker processes.
    """

    resources: Tuple[Resource, ...]
    requests: Tuple[Request, ...]

    def __post_init__(self):
        object.__setattr__(self, "resources", tuple(self.resources))
        object.__setattr__(self, "requests", tuple(self.requests))
        for label, items in (("resource", self.resources), ("request", self.requests)):
            seen = set()
            for item in items:
                if item.id in seen:
                    raise ValueError(f"duplicate {label} id {item.id!r}")
                seen.add(item.id)

    @cached_property
    def resource_by_id(self) -> Dict[str, Resource]:
        return {r.id: r for r in self.resources}

    @cached_property
    def request_by_id(self) -> Dict[str, Request]:
        return {r.id: r for r in self.requests}

    def resource(self, resource_id) -> Resource:
        try:
            return self.resource_by_id[resource_id]
        except KeyError:
            raise UnknownIdError(f"unknown resource id {resource_id!r}") from None

    def request(self, request_id) -> Request:
        try:
            return self.request_by_id[request_id]
        except KeyError:
            raise UnknownIdError(f"unknown request id {request_id!r}") from None

    # JSON schema: {"resources": [...], "requests": [...]}, field names as on the
    # dataclasses, locations as two-element arrays.
    def to_dict(self) -> dict:
        return {
            "resources": [_entity_dict(r) for r in self.resources],
            "requests": [_entity_dict(r) for r in self.requests],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        return cls(
            resources=tuple(Resource(**_entity_kwargs(r)) for r in data["resources"]),
            requests=tuple(Request(**_entity_kwargs(r)) for r in data["requests"]),
        )

    def to_json(self, indent: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        return cls.from_dict(json.loads(text))

    def save(self, path: PathLike) -> None:
        Path(path).write_text(self.to_json(indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path: PathLike) -> "Instance":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _entity_dict(entity) -> dict:
    d = asdict(entity)
    d["location"] = list(d["location"])
    return d


def _entity_kwargs(d: dict) -> dict:
    kwargs = dict(d)
    kwargs["location"] = tuple(kwargs.get("location", (0.0, 0.0)))
    return kwargs


class Pair(NamedTuple):
    """One allocated (request, resource) pair with its transaction price and utility."""

    request_id: str
    resource_id: str
    price: float
    utility: float


@dataclass
class AllocationSet:
    """The allocation S: assigned pairs plus per-resource used capacity.

    ``assign`` is the checked insertion path used by every mechanism. The
    constructor accepts arbitrary pairs so that broken allocations read from
    disk can still be handed to :func:`validate`.
    """

    pairs: List[Pair] = field(default_factory=list)
    used_capacity: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self._assigned = {p.request_id for p in self.pairs}

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def is_assigned(self, request_id) -> bool:
        return request_id in self._assigned

    def used(self, resource_id) -> float:
        return self.used_capacity.get(resource_id, 0.0)

    def assign(self, request: Request, resource: Resource, price: float, utility: float) -> Pair:
        if request.id in self._assigned:
            raise ValueError(f"request {request.id!r} is already allocated")
        used = self.used(resource.id)
        if not is_feasible_pair(request, resource, used, price):
            raise ValueError(f"pair ({request.id!r}, {resource.id!r}) is infeasible")
        pair = Pair(request.id, resource.id, float(price), float(utility))
        self.pairs.append(pair)
        self._assigned.add(request.id)
        self.used_capacity[resource.id] = used + request.demand
        return pair

    def merge(self, other: "AllocationSet") -> None:
        """Absorb an allocation over disjoint requests and resources."""
        for p in other.pairs:
            if p.request_id in self._assigned:
                raise ValueError(f"request {p.request_id!r} allocated twice in merge")
            self.pairs.append(p)
            self._assigned.add(p.request_id)
        for rid, used in other.used_capacity.items():
            self.used_capacity[rid] = self.used_capacity.get(rid, 0.0) + used

    def pair_set(self) -> set:
        return {(p.request_id, p.resource_id) for p in self.pairs}

    def sorted_pairs(self) -> List[Pair]:
        return sorted(self.pairs, key=lambda p: (p.request_id, p.resource_id))

    def to_dict(self) -> dict:
        return {
            "pairs": [p._asdict() for p in self.pairs],
            "used_capacity": dict(self.used_capacity),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AllocationSet":
        pairs = [Pair(p["request_id"], p["resource_id"], float(p["price"]), float(p["utility"]))
                 for p in data["pairs"]]
        used = data.get("used_capacity")
        if used is None:
            return cls(pairs=pairs)
        return cls(pairs=pairs, used_capacity={k: float(v) for k, v in used.items()})

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(Pair._fields)
        for p in self.pairs:
            writer.writerow([p.request_id, p.resource_id, repr(p.price), repr(p.utility)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, instance: Optional[Instance] = None) -> "AllocationSet":
        """Read the CSV form; used capacity is rebuilt from ``instance`` demands when given."""
        rows = list(csv.DictReader(io.StringIO(text)))
        pairs = [Pair(r["request_id"], r["resource_id"], float(r["price"]), float(r["utility"]))
                 for r in rows]
        alloc = cls(pairs=pairs)
        if instance is not None:
            for p in pairs:
                d = instance.request(p.request_id).demand
                alloc.used_capacity[p.resource_id] = alloc.used_capacity.get(p.resource_id, 0.0) + d
        return alloc


def latency(a: Location, b: Location) -> float:
    """Euclidean distance on the location plane."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


def qos_compatible(req: Request, res: Resource) -> bool:
    return (
        res.reliability >= req.min_reliability
        and res.availability >= req.min_availability
        and latency(req.location, res.location) <= req.max_latency
    )


def is_feasible_pair(req: Request, res: Resource, used: float, price: float) -> bool:
    """Capacity, QoS and budget check for placing ``req`` on ``res``.

    Single assignment is the caller's business.
    """
    return (
        used + req.demand <= res.capacity + CAPACITY_TOL
        and qos_compatible(req, res)
        and price <= req.budget
    )


@dataclass(frozen=True)
class Violation:
    kind: str  # "capacity" | "single_assignment" | "qos" | "budget"
    request_id: Optional[str]
    resource_id: Optional[str]
    detail: str = ""


def validate(alloc: AllocationSet, inst: Instance) -> List[Violation]:
    """List every broken feasibility constraint of ``alloc``; empty means feasible.

    Raises UnknownIdError if a pair names an id missing from ``inst``.
    """
    for p in alloc.pairs:
        inst.request(p.request_id)
        inst.resource(p.resource_id)

    violations: List[Violation] = []
    counts: Dict[str, int] = {}
    load: Dict[str, float] = {}
    for p in alloc.pairs:
        counts[p.request_id] = counts.get(p.request_id, 0) + 1
        load[p.resource_id] = load.get(p.resource_id, 0.0) + inst.request(p.request_id).demand

    reported = set()
    for p in alloc.pairs:
        if counts[p.request_id] > 1 and p.request_id not in reported:
            reported.add(p.request_id)
            violations.append(Violation(
                "single_assignment", p.request_id, None,
                f"allocated {counts[p.request_id]} times"))

    for rid, total in load.items():
        cap = inst.resource(rid).capacity
        if total > cap + CAPACITY_TOL:
            violations.append(Violation("capacity", None, rid, f"load {total!r} > capacity {cap!r}"))

    for p in alloc.pairs:
        req, res = inst.request(p.request_id), inst.resource(p.resource_id)
        if not qos_compatible(req, res):
            violations.append(Violation("qos", p.request_id, p.resource_id, _qos_detail(req, res)))
        if p.price > req.budget:
            violations.append(Violation(
                "budget", p.request_id, p.resource_id, f"price {p.price!r} > budget {req.budget!r}"))
    return violations


def _qos_detail(req: Request, res: Resource) -> str:
    failed = []
    if res.reliability < req.min_reliability:
        failed.append("reliability")
    if res.availability < req.min_availability:
        failed.append("availability")
    if latency(req.location, res.location) > req.max_latency:
        failed.append("latency")
    return ",".join(failed)

