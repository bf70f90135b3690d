"""Global allocation objective and its marginal gains.

    F(S) = theta1 * sum of pair utilities
         + theta2 * sum over requesters of sqrt(requester utility)
         + theta3 * sum of assigned resources' energy efficiency

The first and last terms are modular and the middle one is a sum of concave
functions of modular per-requester totals, so F is monotone submodular over
sets of pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable

from .model import AllocationSet, Instance


@dataclass(frozen=True)
class ObjectiveWeights:
    theta1: float = 1.0
    theta2: float = 0.5
    theta3: float = 0.25

    def __post_init__(self):
        if min(self.theta1, self.theta2, self.theta3) < 0:
            raise ValueError("objective weights must be non-negative")
        if not self.theta1 > 0:
            raise ValueError("theta1 must be positive")


def _requester_utility(pairs: Iterable) -> Dict[str, float]:
    totals: Dict[str, float] = {}
    for p in pairs:
        totals[p.request_id] = totals.get(p.request_id, 0.0) + p.utility
    return totals


def phi_fair(alloc: AllocationSet) -> float:
    return sum(math.sqrt(max(u, 0.0)) for u in _requester_utility(alloc.pairs).values())


def psi_energy(alloc: AllocationSet, inst: Instance) -> float:
    return sum(inst.resource(p.resource_id).energy_eff for p in alloc.pairs)


def objective_value(alloc: AllocationSet, inst: Instance,
                    w: ObjectiveWeights = ObjectiveWeights()) -> float:
    energy = psi_energy(alloc, inst)
    return w.theta1 * sum(p.utility for p in alloc.pairs) + w.theta2 * phi_fair(alloc) + w.theta3 * energy


def pair_gain(utility: float, energy_eff: float, w: ObjectiveWeights) -> float:
    """Gain of adding a pair whose requester holds nothing yet.

    Only the candidate's own requester and resource terms move, and with at most
    one pair per requester the requester's prior total is zero.
    """
    return w.theta1 * utility + w.theta2 * math.sqrt(max(utility, 0.0)) + w.theta3 * energy_eff


def marginal_gain(alloc: AllocationSet, candidate, inst: Instance,
                  w: ObjectiveWeights = ObjectiveWeights()) -> float:
    """F(S + candidate) - F(S) in O(1). ``candidate`` is any (request_id, resource_id, ..., utility) record."""
    if alloc.is_assigned(candidate.request_id):
        raise ValueError(f"request {candidate.request_id!r} already allocated")
    return pair_gain(candidate.utility, inst.resource(candidate.resource_id).energy_eff, w)
