# %% [markdown]
# # Training the selection models
#
# A small dataset keeps this quick; the benchmark scripts use 10,000
# scenarios. All three architectures share the loss, optimizer and loop.

# %%
import tempfile
from pathlib import Path

from kato import datasets
from kato.neural import TrainConfig, default_bounds, init_model, selection_accuracy, train
from kato.vec_model import GenConfig

work = Path(tempfile.mkdtemp())
cfg = GenConfig.fixed(20)
manifest = datasets.build_dataset(work, cfg, 1_000, master_seed=1)
print(manifest.counts)
tr, va, te = (datasets.load_split(work, w) for w in datasets.SPLITS)

# %%
for arch in ("kato", "sa", "mlp"):
    model0 = init_model(arch, seed=0, bounds=default_bounds(cfg))
    model, hist = train(tr, va, TrainConfig(arch=arch, epochs=10), model=model0)
    print(f"{arch:4s} {model.n_params} params, val BCE {hist.val_loss[0]:.4f} -> "
          f"{hist.val_loss[hist.best_epoch]:.4f} (epoch {hist.best_epoch}), "
          f"test accuracy {selection_accuracy(model0, te):.3f} -> {selection_accuracy(model, te):.3f}")
    datasets.save_model(work / f"{arch}.json", model)

print("models written to", work)
