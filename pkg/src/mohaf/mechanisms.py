"""Name-addressable mechanisms with one shared call signature.

Every entry is called as ``fn(inst, prices=None, hist=None, seed=0, params=MechanismParams())``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

from .allocator import ClusterConfig, hierarchical_allocate
from .baselines import PriorityScoreWeights, first_price_auction, greedy_priority_auction, random_auction
from .model import AllocationSet, Instance
from .objective import ObjectiveWeights
from .pricing import PricingState
from .utility import DEFAULT_FAIRNESS_PENALTY, FairnessHistory, UtilityWeights

MOHAF = "mohaf"
GREEDY_PRIORITY = "greedy_priority"
FIRST_PRICE = "first_price"
RANDOM = "random"


@dataclass(frozen=True)
class MechanismParams:
    utility: UtilityWeights = field(default_factory=UtilityWeights)
    objective: ObjectiveWeights = field(default_factory=ObjectiveWeights)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    priority: PriorityScoreWeights = field(default_factory=PriorityScoreWeights)
    fairness_penalty: float = DEFAULT_FAIRNESS_PENALTY


def _mohaf(inst: Instance, prices: Optional[PricingState] = None,
           hist: Optional[FairnessHistory] = None, seed: int = 0,
           params: MechanismParams = MechanismParams(), stats: Optional[dict] = None) -> AllocationSet:
    return hierarchical_allocate(inst, prices, hist, params.utility, params.objective,
                                 params.cluster, params.fairness_penalty, stats=stats)


def _greedy_priority(inst, prices=None, hist=None, seed=0, params=MechanismParams(), stats=None):
    return greedy_priority_auction(inst, params.priority, seed, prices, hist,
                                   params.utility, params.fairness_penalty)


def _first_price(inst, prices=None, hist=None, seed=0, params=MechanismParams(), stats=None):
    return first_price_auction(inst, seed, prices, hist, params.utility, params.fairness_penalty)


def _random(inst, prices=None, hist=None, seed=0, params=MechanismParams(), stats=None):
    return random_auction(inst, seed, prices, hist, params.utility, params.fairness_penalty)


MECHANISMS: Dict[str, Callable[..., AllocationSet]] = {
    MOHAF: _mohaf,
    GREEDY_PRIORITY: _greedy_priority,
    FIRST_PRICE: _first_price,
    RANDOM: _random,
}


def get_mechanism(name: str) -> Callable[..., AllocationSet]:
    try:
        return MECHANISMS[name]
    except KeyError:
        raise ValueError(f"unknown mechanism {name!r}; choose from {sorted(MECHANISMS)}") from None
