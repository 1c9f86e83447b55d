# %% [markdown]
# # Splitting a task across the vehicle and selected RSUs
#
# Each participant `i` has a unit cost `c_i` (seconds per Gbit, compute plus
# its share of the link). The min-max split makes everyone finish together.

# %%
from kato.allocation import (
    allocate,
    capacity_profile,
    equalized_allocation,
    iterative_allocation_steps,
    rsu_links,
)
from kato.vec_model import GenConfig, mobcheck_filter, sample_scenario

scenario = sample_scenario(GenConfig.fixed(8, speed=15.0), seed=3)
rsus = mobcheck_filter(scenario)
links = rsu_links(scenario, rsus)
caps = capacity_profile(scenario.vehicle.beta0, links, scenario.params.bandwidth_B)
plan = equalized_allocation(caps, scenario.task.size_Q)
for c in caps:
    print(f"node {c.node_id:2d}: c = {c.unit_cost_c:.3f} s/Gbit, q = {plan.shares_q[c.node_id]:.4f} Gbit")
print(f"makespan {plan.makespan:.4f} s")

# %% [markdown]
# The same split can be reached one RSU at a time: each newcomer takes the
# load the current members give up, and every member finishes at the new,
# shorter time.

# %%
for step in iterative_allocation_steps(scenario.vehicle.beta0, links,
                                       scenario.params.bandwidth_B, scenario.task.size_Q,
                                       order_seed=0):
    print(f"k={step.k}: newcomer {step.newcomer}, ratio {step.ratio_I:.4f}, tau {step.tau:.4f} s")

# %% [markdown]
# `allocate` does the same and attaches a feasibility verdict.

# %%
final = allocate(scenario, rsus)
print(final.feasible, final.violated, round(final.makespan, 4))
