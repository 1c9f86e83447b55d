# %% [markdown]
# # Exact optimum and training labels
#
# Adding an RSU always adds compute but also splits the bandwidth further,
# so the best subset is not "all of them". Two exact solvers agree: full
# enumeration, and a polynomial one that, for each subset size, keeps the
# RSUs with the smallest unit cost at that size.

# %%
import time

from kato.exact_solver import brute_force_optimal, label_scenario, sorted_prefix_optimal
from kato.vec_model import GenConfig, local_compute_time, sample_scenario

scenario = sample_scenario(GenConfig.fixed(16, speed=15.0), seed=7)
for solver in (brute_force_optimal, sorted_prefix_optimal):
    t0 = time.perf_counter()
    res = solver(scenario)
    ms = (time.perf_counter() - t0) * 1e3
    print(f"{solver.__name__:22s} tau* = {res.tau_star:.5f} s, set {res.best_set}, "
          f"{res.subsets_evaluated} candidates, {ms:.1f} ms")
print(f"local-only would take {local_compute_time(scenario.task, scenario.vehicle):.3f} s")

# %% [markdown]
# Labels mark the optimal RSUs in the model's row order (ascending beta).

# %%
sample, _ = label_scenario(scenario)
for nid, row, y in zip(sample.node_ids, sample.features, sample.labels):
    print(f"node {nid:2d} beta {row[2]:6.3f} -> {int(y)}")
