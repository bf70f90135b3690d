# %% [markdown]
# One auction round on a generated market
#
# Build a 400 x 100 market, enumerate the feasible bids and let the greedy
# allocator pick pairs by marginal gain.

# %%
import numpy as np

from mohaf import (GenerationConfig, build_instance, enumerate_bids, greedy_allocate, metric_bundle,
                   objective_value, validate)

inst = build_instance(GenerationConfig(n_requests=400, n_resources=100, seed=3))
bids = enumerate_bids(inst)
print(f"{len(inst.requests)} requests, {len(inst.resources)} resources, {len(bids)} feasible bids")

# %%
# every bid carries its utility and the price it would pay today
u = np.array([b.utility for b in bids])
print("bid utility quartiles", np.round(np.quantile(u, [0.25, 0.5, 0.75]), 3))

# %%
alloc = greedy_allocate(inst, bids)
assert validate(alloc, inst) == []
print(f"allocated {len(alloc)} pairs, F(S) = {objective_value(alloc, inst):.2f}")
for name, value in metric_bundle(alloc, inst).items():
    print(f"  {name:<12} {value:.4f}")

# %%
# how full did the resources get?
load = np.array([alloc.used(s.id) / s.capacity for s in inst.resources])
print("resources used:", (load > 0).sum(), "/", len(load), " mean load of used ones:", load[load > 0].mean().round(3))
