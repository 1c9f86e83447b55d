# %% [markdown]
# # Scenarios, links and the mobility filter
#
# A scenario is one vehicle driving along +x at constant speed, a task of
# `Q` Gbit, and the RSUs that are in range when the task is released.
# Everything here is deterministic given the seed.

# %%
from kato.vec_model import (
    GenConfig,
    distance_at,
    local_compute_time,
    mobcheck_filter,
    mobcheck_horizon,
    sample_scenario,
    transmission_rate,
)

scenario = sample_scenario(GenConfig.fixed(12, speed=19.0), seed=42)
v = scenario.vehicle
print(f"vehicle at ({v.x0:.1f}, {v.y0:.1f}) m, {v.speed_v} m/s, beta0 = {v.beta0:.3f} s/Gbit")
print(f"local-only time T_loc = {local_compute_time(scenario.task, v):.3f} s")

# %% [markdown]
# Link rate shrinks with distance and with the number of RSUs sharing the
# bandwidth.

# %%
r = scenario.rsus[0]
d0 = distance_at(scenario, r.id, 0.0)
for m in (1, 2, 5):
    rate = transmission_rate(r.eta_lin, d0, scenario.params.bandwidth_B, m)
    print(f"RSU {r.id}: d = {d0:.1f} m, m = {m}: {rate:.3f} Gbit/s")

# %% [markdown]
# The filter predicts each RSU's distance at the worst-case finishing time
# `min(T, T_loc)` and drops those that will be out of range by then.

# %%
t = mobcheck_horizon(scenario)
kept = {r.id for r in mobcheck_filter(scenario)}
for r in scenario.rsus:
    d = distance_at(scenario, r.id, t)
    print(f"RSU {r.id:2d}: {distance_at(scenario, r.id, 0):6.1f} m now, {d:6.1f} m at t={t:.2f} s"
          f" -> {'keep' if r.id in kept else 'drop'}")
