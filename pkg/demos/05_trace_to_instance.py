# %% [markdown]
# From job events to an auction instance
#
# Trace rows are comma separated; only submission events (type 0) become
# requests. Column positions are configurable for traces laid out differently.

# %%
from mohaf import GenerationConfig, build_instance, hierarchical_allocate, parse_job_events, validate
from mohaf.ingest import parse_columns

raw = """\
1000,7001,0,2,5
1001,7002,1,2,5
1002,7003,0,3,10
1003,7004,0,0,4
not,a,row
1004,7005,0,1,9
"""
events = parse_job_events(raw.splitlines())
print(events, "malformed rows:", events.malformed)

# %%
# a trace laid out job_id, timestamp, type, priority, class
cols = parse_columns("job_id=0,timestamp=1,event_type=2,priority=3,scheduling_class=4")
print(parse_job_events(["7001,1000,0,5,2"], cols))

# %%
inst = build_instance(GenerationConfig(n_requests=4, n_resources=2, seed=1), events)
for r in inst.requests:
    print(r.id, f"demand {r.demand:.3f}  budget {r.budget:.3f}  priority {r.priority}")

# %%
# larger synthetic market, above the clustering threshold
big = build_instance(GenerationConfig(n_requests=1200, n_resources=300, seed=0))
stats = {}
alloc = hierarchical_allocate(big, stats=stats)
print(stats, len(alloc), "pairs,", len(validate(alloc, big)), "violations")
