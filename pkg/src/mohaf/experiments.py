"""The four studies (mechanism comparison, ablation, scalability, price convergence)
as plain functions returning row dicts, plus the experiment configuration."""

from __future__ import annotations

import gc
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .allocator import ClusterConfig, hierarchical_allocate
from .baselines import PriorityScoreWeights
from .ingest import DEFAULT_QOS, GenerationConfig, JobEvent, build_instance, stationary_instance
from .mechanisms import FIRST_PRICE, GREEDY_PRIORITY, MECHANISMS, MOHAF, RANDOM, MechanismParams, get_mechanism
from .metrics import METRIC_NAMES, mean_ci95, metric_bundle, paired_t_pvalue
from .model import Instance, validate
from .objective import ObjectiveWeights, objective_value
from .pricing import PricingConfig, check_convergence, run_pricing_rounds
from .utility import DEFAULT_FAIRNESS_PENALTY, UtilityWeights

ALL_MECHANISMS = (MOHAF, GREEDY_PRIORITY, FIRST_PRICE, RANDOM)

# Full, NoCost, NoQoS and CostOnly as published; NoEnergy and NoFairness are
# Full with the ablated weight zeroed and the remainder rescaled to sum to 1.
ABLATIONS: Dict[str, UtilityWeights] = {
    "Full": UtilityWeights(0.4, 0.3, 0.1, 0.2),
    "NoCost": UtilityWeights(0.0, 0.5, 0.2, 0.3),
    "NoQoS": UtilityWeights(0.6, 0.0, 0.1, 0.3),
    "NoEnergy": UtilityWeights(4 / 9, 3 / 9, 0.0, 2 / 9),
    "NoFairness": UtilityWeights(0.5, 0.375, 0.125, 0.0),
    "CostOnly": UtilityWeights(1.0, 0.0, 0.0, 0.0),
}

DEFAULT_LADDER = ((500, 125), (1000, 250), (2000, 500))


@dataclass
class ExperimentConfig:
    mechanisms: List[str] = field(default_factory=lambda: list(ALL_MECHANISMS))
    utility: UtilityWeights = field(default_factory=UtilityWeights)
    objective: ObjectiveWeights = field(default_factory=ObjectiveWeights)
    pricing: PricingConfig = field(default_factory=PricingConfig)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    priority: PriorityScoreWeights = field(default_factory=PriorityScoreWeights)
    fairness_penalty: float = DEFAULT_FAIRNESS_PENALTY
    n_requests: int = 1000
    n_resources: int = 250
    qos_defaults: Tuple[float, float, float] = DEFAULT_QOS
    seeds: List[int] = field(default_factory=lambda: list(range(10)))
    output_dir: str = "runs"
    ladder: List[Tuple[int, int]] = field(default_factory=lambda: [tuple(x) for x in DEFAULT_LADDER])
    timing_repeats: int = 3
    rounds: int = 10_000
    window: int = 1000
    price_mechanism: str = MOHAF
    price_instance: str = "stationary"  # "stationary", "generated" or a path to instance JSON
    trace: Optional[str] = None
    columns: Optional[str] = None
    threads: int = 1

    _NESTED = {
        "utility": UtilityWeights, "objective": ObjectiveWeights, "pricing": PricingConfig,
        "cluster": ClusterConfig, "priority": PriorityScoreWeights,
    }

    def __post_init__(self):
        if not self.mechanisms:
            raise ValueError("at least one mechanism is required")
        for name in self.mechanisms:
            get_mechanism(name)
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.n_requests < 1 or self.n_resources < 1:
            raise ValueError("n_requests and n_resources must be >= 1")
        if self.rounds < self.window or self.window < 1:
            raise ValueError("need rounds >= window >= 1")
        if self.timing_repeats < 1 or self.threads < 1:
            raise ValueError("timing_repeats and threads must be >= 1")
        self.qos_defaults = tuple(self.qos_defaults)
        self.ladder = [tuple(int(v) for v in x) for x in self.ladder]
        self.seeds = [int(s) for s in self.seeds]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for key, value in data.items():
            if key in cls._NESTED and isinstance(value, dict):
                value = cls._NESTED[key](**value)
            kwargs[key] = value
        return cls(**kwargs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["qos_defaults"] = list(self.qos_defaults)
        d["ladder"] = [list(x) for x in self.ladder]
        return d

    def params(self, utility: Optional[UtilityWeights] = None) -> MechanismParams:
        return MechanismParams(utility=utility or self.utility, objective=self.objective,
                               cluster=self.cluster, priority=self.priority,
                               fairness_penalty=self.fairness_penalty)

    def generation(self, seed: int, n_requests: Optional[int] = None,
                   n_resources: Optional[int] = None) -> GenerationConfig:
        return GenerationConfig(n_requests or self.n_requests, n_resources or self.n_resources,
                                seed, self.qos_defaults)


class RunFailure(Exception):
    def __init__(self, failures: List[Tuple[str, int, str]]):
        self.failures = failures
        super().__init__("; ".join(f"{m}/seed {s}: {msg}" for m, s, msg in failures))


def _instance(cfg: ExperimentConfig, seed: int, events: Optional[Sequence[JobEvent]]) -> Instance:
    return build_instance(cfg.generation(seed), events)


def _compare_seed(cfg: ExperimentConfig, seed: int, events, params_by_label) -> List[dict]:
    inst = _instance(cfg, seed, events)
    rows = []
    for label, (mech, params) in params_by_label.items():
        try:
            alloc = get_mechanism(mech)(inst, seed=seed, params=params)
            violations = validate(alloc, inst)
            if violations:
                raise RuntimeError(f"{len(violations)} feasibility violations")
            row = {"label": label, "mechanism": mech, "seed": seed, "error": ""}
            row.update(metric_bundle(alloc, inst))
            row["objective"] = objective_value(alloc, inst, params.objective)
        except Exception as exc:  # reported per (mechanism, seed), never fatal to the batch
            row = {"label": label, "mechanism": mech, "seed": seed, "error": f"{type(exc).__name__}: {exc}"}
        rows.append(row)
    return rows


def _fan_out(cfg: ExperimentConfig, fn, args_list) -> List:
    if cfg.threads > 1 and len(args_list) > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(fn, *zip(*args_list)))
    return [fn(*args) for args in args_list]


def _run_labelled(cfg: ExperimentConfig, params_by_label, events) -> List[dict]:
    args = [(cfg, s, events, params_by_label) for s in cfg.seeds]
    rows = [row for chunk in _fan_out(cfg, _compare_seed, args) for row in chunk]
    order = {label: n for n, label in enumerate(params_by_label)}
    rows.sort(key=lambda r: (order[r["label"]], r["seed"]))
    return rows


def summarize(rows: List[dict], metrics: Sequence[str] = METRIC_NAMES) -> Dict[str, dict]:
    """Mean and 95% CI half-width per label and metric over the successful seeds."""
    out: Dict[str, dict] = {}
    for label in dict.fromkeys(r["label"] for r in rows):
        ok = [r for r in rows if r["label"] == label and not r["error"]]
        entry = {"n": len(ok)}
        for m in metrics:
            vals = [r[m] for r in ok if not math.isnan(r[m])]
            if len(vals) >= 2:
                mean, half = mean_ci95(vals)
            elif vals:
                mean, half = vals[0], math.nan
            else:
                mean, half = math.nan, math.nan
            entry[m] = {"mean": mean, "ci95": half}
        out[label] = entry
    return out


def paired_comparisons(rows: List[dict], reference: str, metric: str = "efficiency") -> Dict[str, float]:
    """One-sided paired t p-values for ``reference`` beating every other label on ``metric``."""
    ref = {r["seed"]: r[metric] for r in rows if r["label"] == reference and not r["error"]}
    out = {}
    for label in dict.fromkeys(r["label"] for r in rows):
        if label == reference:
            continue
        other = {r["seed"]: r[metric] for r in rows if r["label"] == label and not r["error"]}
        seeds = sorted(set(ref) & set(other))
        if len(seeds) >= 2:
            out[label] = paired_t_pvalue([ref[s] for s in seeds], [other[s] for s in seeds])
    return out


def compare(cfg: ExperimentConfig, events: Optional[Sequence[JobEvent]] = None) -> List[dict]:
    """Every configured mechanism on the same instance for each seed."""
    params = cfg.params()
    return _run_labelled(cfg, {m: (m, params) for m in cfg.mechanisms}, events)


def ablate(cfg: ExperimentConfig, events: Optional[Sequence[JobEvent]] = None) -> List[dict]:
    """MOHAF under each ablation weight vector, same instances for every config."""
    return _run_labelled(cfg, {name: (MOHAF, cfg.params(w)) for name, w in ABLATIONS.items()}, events)


def _timed(fn, repeats: int) -> Tuple[float, object]:
    best, result = math.inf, None
    enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(repeats):
            t0 = time.perf_counter()
            result = fn()
            best = min(best, time.perf_counter() - t0)
    finally:
        if enabled:
            gc.enable()
    return best, result


def scale(cfg: ExperimentConfig, events: Optional[Sequence[JobEvent]] = None) -> Tuple[List[dict], List[dict]]:
    """MOHAF across the size ladder.

    Returns deterministic result rows (bid count, objective) and separate timing
    rows (best wall time over ``timing_repeats`` runs).
    """
    params = cfg.params()
    results, timings = [], []
    for seed in cfg.seeds:
        for n, m in cfg.ladder:
            inst = build_instance(cfg.generation(seed, n, m), events)
            stats: dict = {}

            def run():
                stats.clear()
                return hierarchical_allocate(inst, None, None, params.utility, params.objective,
                                             params.cluster, params.fairness_penalty, stats=stats)

            wall, alloc = _timed(run, cfg.timing_repeats)
            results.append({"n_requests": n, "n_resources": m, "seed": seed,
                            "n_bids": stats["n_bids"], "n_clusters": stats["n_clusters"],
                            "n_pairs": len(alloc), "objective": objective_value(alloc, inst, params.objective)})
            timings.append({"n_requests": n, "n_resources": m, "seed": seed, "wall_time_s": wall})
    return results, timings


def growth_factors(timings: List[dict]) -> List[dict]:
    """Ratio of mean wall time between consecutive ladder rungs."""
    sizes = list(dict.fromkeys((t["n_requests"], t["n_resources"]) for t in timings))
    mean_t = {sz: float(np.mean([t["wall_time_s"] for t in timings
                                 if (t["n_requests"], t["n_resources"]) == sz])) for sz in sizes}
    return [{"from": list(a), "to": list(b), "factor": mean_t[b] / mean_t[a]}
            for a, b in zip(sizes, sizes[1:])]


def price_instance(cfg: ExperimentConfig, seed: int, events=None) -> Instance:
    if cfg.price_instance == "stationary":
        return stationary_instance()
    if cfg.price_instance == "generated":
        return _instance(cfg, seed, events)
    return Instance.load(cfg.price_instance)


def price_sim(cfg: ExperimentConfig, seed: int, events=None):
    inst = price_instance(cfg, seed, events)
    log = run_pricing_rounds(inst, cfg.price_mechanism, cfg.pricing, cfg.rounds, seed=seed,
                             params=cfg.params())
    report = check_convergence(log, cfg.window, cfg.pricing)
    return inst, log, report


def with_overrides(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})


__all__ = [
    "ABLATIONS", "ALL_MECHANISMS", "ExperimentConfig", "MECHANISMS", "RunFailure", "ablate",
    "compare", "growth_factors", "paired_comparisons", "price_sim", "scale", "summarize",
    "with_overrides",
]
