"""Evaluation metrics and the statistics used to compare mechanisms across seeds."""

from __future__ import annotations

import math
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy import stats

from .model import AllocationSet, Instance


class UndefinedMetricError(ValueError):
    """The metric has no value for this input (e.g. all-zero shares, empty allocation)."""


def allocation_efficiency(alloc: AllocationSet, inst: Instance) -> float:
    """Total pair utility per request, as a fraction."""
    if not inst.requests:
        return 0.0
    return math.fsum(p.utility for p in alloc.pairs) / len(inst.requests)


def revenue(alloc: AllocationSet) -> float:
    return math.fsum(p.price for p in alloc.pairs)


def satisfaction_rate(alloc: AllocationSet, inst: Instance) -> float:
    if not inst.requests:
        return 0.0
    return len(alloc.pairs) / len(inst.requests)


def resource_utilization(alloc: AllocationSet, inst: Instance) -> float:
    if not inst.resources:
        return 0.0
    return len({p.resource_id for p in alloc.pairs}) / len(inst.resources)


def jain_index(values: Sequence[float]) -> float:
    x = np.asarray(values, dtype=float)
    if x.size == 0 or not (x > 0).any():
        raise UndefinedMetricError("Jain's index needs at least one positive value")
    if (x < 0).any():
        raise ValueError("Jain's index is defined for non-negative values")
    return float(x.sum() ** 2 / (x.size * (x ** 2).sum()))


def allocated_jain(alloc: AllocationSet) -> float:
    """Jain's index over the utilities of requesters that received an allocation."""
    per_requester: Dict[str, float] = {}
    for p in alloc.pairs:
        per_requester[p.request_id] = per_requester.get(p.request_id, 0.0) + p.utility
    return jain_index(list(per_requester.values()))


def energy_efficiency_score(alloc: AllocationSet, inst: Instance) -> float:
    if not alloc.pairs:
        raise UndefinedMetricError("energy efficiency of an empty allocation")
    return math.fsum(inst.resource(p.resource_id).energy_eff for p in alloc.pairs) / len(alloc.pairs)


METRIC_NAMES = ("efficiency", "revenue", "satisfaction", "utilization", "fairness", "energy")


def metric_bundle(alloc: AllocationSet, inst: Instance) -> Dict[str, float]:
    """Every metric for one allocation; undefined ones come back as NaN."""
    try:
        fairness = allocated_jain(alloc)
    except UndefinedMetricError:
        fairness = math.nan
    try:
        energy = energy_efficiency_score(alloc, inst)
    except UndefinedMetricError:
        energy = math.nan
    return {
        "efficiency": allocation_efficiency(alloc, inst),
        "revenue": revenue(alloc),
        "satisfaction": satisfaction_rate(alloc, inst),
        "utilization": resource_utilization(alloc, inst),
        "fairness": fairness,
        "energy": energy,
    }


def mean_ci95(samples: Sequence[float]) -> Tuple[float, float]:
    """Sample mean and Student-t 95% half-width (n - 1 degrees of freedom)."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need at least two samples for a confidence interval")
    sd = x.std(ddof=1)
    return float(x.mean()), float(stats.t.ppf(0.975, n - 1) * sd / math.sqrt(n))


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> Tuple[float, int]:
    """Paired t statistic of ``a - b`` and its degrees of freedom.

    Zero-variance differences give 0.0 when they are all zero and a signed
    infinity otherwise.
    """
    x, y = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"paired samples differ in length: {x.size} vs {y.size}")
    n = x.size
    if n < 2:
        raise ValueError("need at least two pairs")
    d = x - y
    mean = d.mean()
    sd = d.std(ddof=1)
    if sd == 0:
        return (0.0 if mean == 0 else math.copysign(math.inf, mean)), n - 1
    return float(mean / (sd / math.sqrt(n))), n - 1


def paired_t_pvalue(a: Sequence[float], b: Sequence[float], alternative: str = "greater") -> float:
    """p-value of the paired t test; ``alternative="greater"`` tests mean(a - b) > 0."""
    t, df = paired_t_test(a, b)
    if alternative == "greater":
        return float(stats.t.sf(t, df))
    if alternative == "less":
        return float(stats.t.cdf(t, df))
    if alternative == "two-sided":
        return float(2 * stats.t.sf(abs(t), df))
    raise ValueError(f"unknown alternative {alternative!r}")
