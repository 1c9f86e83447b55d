# %% [markdown]
# # Benchmarks
#
# Gap to the exact optimum for every policy, success under mobility with
# and without the filter, and inference time. Trains quick models first.

# %%
import tempfile
from pathlib import Path

from kato import bench, datasets
from kato.neural import TrainConfig, default_bounds, init_model, train
from kato.vec_model import GenConfig

work = Path(tempfile.mkdtemp())
cfg = GenConfig.fixed(20)
datasets.build_dataset(work, cfg, 2_000, master_seed=2)
tr, va = datasets.load_split(work, "train"), datasets.load_split(work, "val")
models = {a: train(tr, va, TrainConfig(arch=a), model=init_model(a, bounds=default_bounds(cfg)))[0]
          for a in ("kato", "sa", "mlp")}

# %% [markdown]
# Mean optimality gap per policy and size.

# %%
rows = bench.bench_delay(models, sizes=(20, 30), count=10)
for s in bench.summarize(rows, ("n", "policy")):
    print(f"n={s['n']} {s['policy']:15s} gap {s['mean_gap']:.3f}")

# %% [markdown]
# Success rate at the highest speed, with and without the mobility filter.

# %%
rows = bench.bench_success_rate(models["kato"], speeds=(19.0,), sizes=(30,), count=50)
for s in bench.summarize(rows, ("mobcheck",)):
    print(f"mobcheck={s['mobcheck']}: success {s['success_rate']:.2f}")

# %% [markdown]
# Median wall time per call.

# %%
rows = bench.bench_runtime(models, sizes=(20, 50), count=2, reps=5)
for s in bench.summarize(rows, ("n", "policy")):
    print(f"n={s['n']} {s['policy']:18s} {s['median_wall_us']:10.0f} us")
