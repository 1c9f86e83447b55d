"""Dataset generation, labeling, deterministic splits and file persistence.

A dataset directory holds three files::

    scenarios.jsonl   one scenario per line
    labels.jsonl      one label record per line, same order
    manifest.json     generator config, master seed, splits, sha256 digests

All floats go through ``json`` which writes the shortest repr that
round-trips exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .allocation import OffloadingPlan
from .exact_solver import label_scenario
from .neural.features import LabeledSample, encode_sort
from .neural.model import SelectionModel
from .vec_model import GenConfig, Scenario, mobcheck_filter, sample_scenario

FORMAT_VERSION = 1
SCENARIOS = "scenarios.jsonl"
LABELS = "labels.jsonl"
MANIFEST = "manifest.json"
SPLITS = ("train", "val", "test")
DEFAULT_RATIOS = (0.70, 0.15, 0.15)
_SPLIT_STREAM = 0x5EED


class DatasetCorruptionError(RuntimeError):
    pass


def scenario_seed(master_seed: int, index: int) -> int:
    """Per-index seed; independent of how indices are spread over workers."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def split_counts(count: int, ratios: Sequence[float] = DEFAULT_RATIOS) -> tuple[int, int, int]:
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1: {ratios}")
    n_train = int(round(count * ratios[0]))
    n_val = int(round(count * ratios[1]))
    return n_train, n_val, count - n_train - n_val


def split_indices(count: int, master_seed: int,
                  ratios: Sequence[float] = DEFAULT_RATIOS) -> dict[str, list[int]]:
    """Seeded shuffle, then contiguous ranges; each split listed in ascending order."""
    perm = np.random.default_rng([master_seed, _SPLIT_STREAM]).permutation(count)
    n_train, n_val, _ = split_counts(count, ratios)
    parts = (perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:])
    return {name: sorted(int(i) for i in part) for name, part in zip(SPLITS, parts)}


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_jsonl(path: Path, records: Iterable[dict]) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def read_jsonl(path: Path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def save_scenarios(path: Path, scenarios: Iterable[Scenario]) -> None:
    write_jsonl(path, (s.to_dict() for s in scenarios))


def load_scenarios(path: Path) -> list[Scenario]:
    return [Scenario.from_dict(d) for d in read_jsonl(path)]


def label_record(sample: LabeledSample) -> dict:
    return {"scenario_id": sample.scenario_id, "sorted_node_ids": list(sample.node_ids),
            "labels": [int(y) for y in sample.labels], "tau_star": sample.tau_star}


def save_model(path: Path, model: SelectionModel) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=1) + "\n")


def load_model(path: Path) -> SelectionModel:
    return SelectionModel.from_dict(json.loads(Path(path).read_text()))


def save_plan(path: Path, plan: OffloadingPlan) -> None:
    Path(path).write_text(json.dumps(plan.to_dict()) + "\n")


def write_report(path: Path, rows: Sequence[dict]) -> None:
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


def read_report(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _sample_one(args) -> Scenario:
    config, master_seed, index = args
    return sample_scenario(config, scenario_seed(master_seed, index), scenario_id=index)


def _label_one(args) -> dict:
    scenario, method = args
    sample, _ = label_scenario(scenario, method)
    return label_record(sample)


def _pmap(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=64))


@dataclass
class DatasetManifest:
    master_seed: int
    generator: dict
    counts: dict
    ratios: tuple[float, float, float]
    splits: dict[str, list[int]]
    digests: dict[str, str]
    solver: str = "prefix"
    format_version: int = FORMAT_VERSION

    def to_dict(self) -> dict:
        return {"format_version": self.format_version, "master_seed": self.master_seed,
                "generator": self.generator, "counts": self.counts,
                "ratios": list(self.ratios), "solver": self.solver,
                "digests": self.digests, "splits": self.splits}

    @classmethod
    def from_dict(cls, d: dict) -> DatasetManifest:
        if d.get("format_version") != FORMAT_VERSION:
            raise DatasetCorruptionError(f"unsupported manifest version {d.get('format_version')}")
        return cls(master_seed=d["master_seed"], generator=d["generator"], counts=d["counts"],
                   ratios=tuple(d["ratios"]), splits=d["splits"], digests=d["digests"],
                   solver=d.get("solver", "prefix"))

    def save(self, directory: Path) -> None:
        Path(directory, MANIFEST).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, directory: Path) -> DatasetManifest:
        return cls.from_dict(json.loads(Path(directory, MANIFEST).read_text()))


def generate(directory: Path, config: GenConfig, count: int, master_seed: int,
             workers: int = 1, ratios: Sequence[float] = DEFAULT_RATIOS) -> DatasetManifest:
    """Sample ``count`` scenarios into ``directory`` and write an unlabeled manifest."""
    if count < 1:
        raise ValueError("count must be at least 1")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    scenarios = _pmap(_sample_one, [(config, master_seed, i) for i in range(count)], workers)
    save_scenarios(directory / SCENARIOS, scenarios)
    n_train, n_val, n_test = split_counts(count, ratios)
    manifest = DatasetManifest(
        master_seed=master_seed, generator=config.to_dict(),
        counts={"total": count, "train": n_train, "val": n_val, "test": n_test},
        ratios=tuple(ratios), splits=split_indices(count, master_seed, ratios),
        digests={SCENARIOS: file_digest(directory / SCENARIOS)})
    manifest.save(directory)
    return manifest


def label(directory: Path, method: str = "prefix", workers: int = 1) -> DatasetManifest:
    """Label every scenario in ``directory`` with the exact solver."""
    directory = Path(directory)
    manifest = DatasetManifest.load(directory)
    _check_digest(directory, SCENARIOS, manifest)
    scenarios = load_scenarios(directory / SCENARIOS)
    records = _pmap(_label_one, [(s, method) for s in scenarios], workers)
    write_jsonl(directory / LABELS, records)
    manifest.digests[LABELS] = file_digest(directory / LABELS)
    manifest.solver = method
    manifest.save(directory)
    return manifest


def build_dataset(directory: Path, config: GenConfig, count: int, master_seed: int,
                  method: str = "prefix", workers: int = 1) -> DatasetManifest:
    generate(directory, config, count, master_seed, workers)
    return label(directory, method, workers)


def _check_digest(directory: Path, name: str, manifest: DatasetManifest) -> None:
    expected = manifest.digests.get(name)
    if expected is None:
        raise DatasetCorruptionError(f"manifest has no digest for {name}")
    actual = file_digest(directory / name)
    if actual != expected:
        raise DatasetCorruptionError(f"{name}: digest {actual[:12]} != manifest {expected[:12]}")


def _check_split(which: str) -> None:
    if which not in SPLITS and which != "all":
        raise ValueError(f"unknown split {which!r}")


def load_split_scenarios(directory: Path, which: str) -> list[Scenario]:
    _check_split(which)
    directory = Path(directory)
    manifest = DatasetManifest.load(directory)
    _check_digest(directory, SCENARIOS, manifest)
    scenarios = load_scenarios(directory / SCENARIOS)
    return [scenarios[i] for i in manifest.splits[which]] if which != "all" else scenarios


def load_split(directory: Path, which: str) -> list[LabeledSample]:
    """Labeled samples of one split, in ascending scenario-index order."""
    _check_split(which)
    directory = Path(directory)
    manifest = DatasetManifest.load(directory)
    _check_digest(directory, SCENARIOS, manifest)
    _check_digest(directory, LABELS, manifest)
    scenarios = load_scenarios(directory / SCENARIOS)
    labels = read_jsonl(directory / LABELS)
    if len(labels) != len(scenarios):
        raise DatasetCorruptionError("scenario and label files differ in length")
    indices = range(len(scenarios)) if which == "all" else manifest.splits[which]
    out = []
    for i in indices:
        s, rec = scenarios[i], labels[i]
        A, node_ids = encode_sort(s.vehicle, mobcheck_filter(s))
        if node_ids != rec["sorted_node_ids"] or rec["scenario_id"] != s.id:
            raise DatasetCorruptionError(f"label record {i} does not match its scenario")
        out.append(LabeledSample(A, np.asarray(rec["labels"], dtype=float), tuple(node_ids),
                                 s.id, rec["tau_star"]))
    return out
