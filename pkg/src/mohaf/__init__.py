"""Multi-objective hierarchical auctions for resource allocation.

Greedy marginal-gain allocation of a monotone submodular objective over
feasible (request, resource) pairs, k-means decomposition for large markets,
utilization-driven unit pricing, three baseline auctions and the metrics to
compare them.

Basic example
-------------

.. code:: python

    from mohaf import GenerationConfig, build_instance, hierarchical_allocate, metric_bundle

    inst = build_instance(GenerationConfig(n_requests=400, n_resources=100, seed=3))
    alloc = hierarchical_allocate(inst)
    metric_bundle(alloc, inst)
"""

__version__ = "0.1.0"

from .allocator import (Bid, ClusterConfig, ClusterPlan, InstanceTooLargeError, brute_force_allocate,
                        enumerate_bids, greedy_allocate, hierarchical_allocate, kmeans_cluster)
from .baselines import PriorityScoreWeights, first_price_auction, greedy_priority_auction, random_auction
from .ingest import (GenerationConfig, JobEvent, TraceError, build_instance, generate_resources,
                     parse_job_events, request_from_job, stationary_instance)
from .mechanisms import MECHANISMS, MechanismParams, get_mechanism
from .metrics import (UndefinedMetricError, allocated_jain, allocation_efficiency, energy_efficiency_score,
                      jain_index, mean_ci95, metric_bundle, paired_t_pvalue, paired_t_test, resource_utilization,
                      revenue, satisfaction_rate)
from .model import (AllocationSet, Instance, Pair, Request, Resource, UnknownIdError, Violation,
                    is_feasible_pair, latency, validate)
from .objective import ObjectiveWeights, marginal_gain, objective_value, phi_fair, psi_energy
from .pricing import (PricingConfig, PricingState, check_convergence, run_pricing_rounds,
                      transaction_price, update_price)
from .utility import (FairnessHistory, UtilityWeights, aggregate_utility, cost_score, energy_score,
                      fairness_score, qos_score)
