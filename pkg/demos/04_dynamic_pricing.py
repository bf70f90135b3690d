# %% [markdown]
# Utilization-driven prices settling on a stationary market
#
# Three isolated markets, each a unit-capacity resource and five requests of
# demand 0.2. One request per market has a thin budget, so prices climb until
# it is priced out, utilization drops to the 0.8 target and the price freezes.

# %%
import numpy as np

from mohaf import PricingConfig, check_convergence, run_pricing_rounds, stationary_instance

cfg = PricingConfig()  # inverse-sqrt step, tau = 0.8
inst = stationary_instance()
log = run_pricing_rounds(inst, "mohaf", cfg, rounds=3000)

prices = np.array([[rec.price[s.id] for s in inst.resources] for rec in log])
for t in (0, 10, 100, 500, 1000, 2999):
    print(f"round {t:>5}  prices {np.round(prices[t], 4)}  utilization {[round(log[t].utilization[s.id], 2) for s in inst.resources]}")

# %%
print(check_convergence(log, 1000, cfg))

# %%
# a market nobody wants: the price walks down to the floor
from mohaf import Instance

idle = Instance(resources=inst.resources, requests=())
state_log = run_pricing_rounds(idle, "mohaf", cfg, rounds=400)
print("idle market price after 400 rounds:", state_log[-1].price)
