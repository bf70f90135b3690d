# %% [markdown]
# Greedy against the exhaustive optimum
#
# Small markets are cheap to solve exactly, so we can see how far greedy
# falls short. Capacity turns the problem into a knapsack: a large request
# with the best single-pair gain can crowd out several smaller ones.

# %%
import math

import numpy as np

from mohaf import GenerationConfig, brute_force_allocate, build_instance, enumerate_bids, greedy_allocate, objective_value

ratios = []
worst = None
for seed in range(200):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(1, 8)), int(rng.integers(1, 4))
    inst = build_instance(GenerationConfig(n, m, seed))
    bids = enumerate_bids(inst)
    opt = objective_value(brute_force_allocate(inst, bids), inst)
    got = objective_value(greedy_allocate(inst, bids), inst)
    r = got / opt if opt else 1.0
    ratios.append(r)
    if worst is None or r < worst[0]:
        worst = (r, seed, inst, bids)

ratios = np.array(ratios)
print(f"mean ratio {ratios.mean():.4f}, optimal on {(ratios > 1 - 1e-12).mean():.0%} of instances")
print(f"below 1-1/e = {1 - 1 / math.e:.4f}: {(ratios < 1 - 1 / math.e).sum()} instances")

# %%
r, seed, inst, bids = worst
print(f"worst case: seed {seed}, ratio {r:.3f}")
print("capacities", [round(s.capacity, 3) for s in inst.resources])
print("greedy  ", [(p.request_id, round(inst.request(p.request_id).demand, 3)) for p in greedy_allocate(inst, bids)])
print("optimum ", [(p.request_id, round(inst.request(p.request_id).demand, 3)) for p in brute_force_allocate(inst, bids)])
