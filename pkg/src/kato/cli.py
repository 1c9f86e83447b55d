"""Command-line entry point: ``kato gen | label | train | eval | solve | bench``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench, datasets
from .neural.features import default_bounds
from .neural.model import init_model
from .neural.train import TrainConfig, train
from .policies import canonical_policy, run_policy
from .vec_model import GenConfig

log = logging.getLogger("kato")


def _on_off(value: str) -> bool:
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return value == "on"


def _csv(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _ints(value: str) -> list[int]:
    return [int(v) for v in _csv(value)]


def _floats(value: str) -> list[float]:
    return [float(v) for v in _csv(value)]


def _load_models(paths):
    """arch -> model; with several models of one arch, key them by training size too."""
    models, by_size = {}, {}
    for p in paths or ():
        m = datasets.load_model(p)
        models[m.arch] = m
        n = m.train_meta.get("n")
        if n is not None:
            by_size.setdefault(int(n), {})[m.arch] = m
    return models, by_size


def _emit(rows, out):
    if out:
        datasets.write_report(out, rows)
        log.info("wrote %d rows to %s", len(rows), out)
    else:
        if rows:
            print(",".join(rows[0]))
            for r in rows:
                print(",".join(str(r[k]) for k in rows[0]))


def cmd_gen(args):
    cfg = GenConfig.fixed(args.n, args.speed)
    m = datasets.generate(args.out, cfg, args.count, args.seed, workers=args.workers)
    print(json.dumps(m.counts))


def cmd_label(args):
    m = datasets.label(args.dataset, method=args.solver, workers=args.workers)
    print(json.dumps({"labels": m.digests[datasets.LABELS]}))


def cmd_train(args):
    train_set = datasets.load_split(args.dataset, "train")
    val_set = datasets.load_split(args.dataset, "val")
    gen = GenConfig.from_dict(datasets.DatasetManifest.load(args.dataset).generator)
    cfg = TrainConfig(arch=args.arch, epochs=args.epochs, lr=args.lr, batch=args.batch,
                      seed=args.seed, h=args.hidden)
    model0 = init_model(args.arch, h=args.hidden, seed=args.seed, bounds=default_bounds(gen))
    model, hist = train(train_set, val_set, cfg, model=model0)
    model.train_meta["n"] = gen.n[1]
    datasets.save_model(args.out, model)
    print(json.dumps({"arch": model.arch, "best_epoch": hist.best_epoch,
                      "val_loss": hist.val_loss[hist.best_epoch]}))


def _scenarios(args):
    if args.dataset:
        return datasets.load_split_scenarios(args.dataset, args.split)
    return bench.grid_scenarios(args.n, args.count, args.seed, args.speed)


def cmd_eval(args):
    models, _ = _load_models(args.model)
    rows = bench.evaluate(_scenarios(args), args.policies, models, mobcheck=args.mobcheck)
    _emit(rows, args.out)


def cmd_solve(args):
    scenarios = datasets.load_scenarios(args.scenario)
    models, _ = _load_models(args.model)
    plan = run_policy(args.policy, scenarios[args.index], models, mobcheck=args.mobcheck)
    text = json.dumps(plan.to_dict())
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)


def cmd_bench(args):
    models, by_size = _load_models(args.model)
    if args.experiment == "success-rate":
        if "kato" not in models:
            raise SystemExit("success-rate needs a kato --model")
        modes = (args.mobcheck,) if args.mobcheck_given else (True, False)
        rows = bench.bench_success_rate(models["kato"], args.speeds, args.sizes, args.count,
                                        args.seed, modes)
    elif args.experiment == "delay":
        rows = bench.bench_delay(by_size or models, args.sizes, args.count, args.seed,
                                 args.speed, args.policies)
    elif args.experiment == "runtime":
        rows = bench.bench_runtime(models, args.sizes, args.count, args.seed, args.reps,
                                   args.policies)
    else:
        kato_by_size = {n: ms["kato"] for n, ms in by_size.items() if "kato" in ms}
        if not kato_by_size:
            raise SystemExit("generalization needs kato --model files trained via `kato train`")
        rows = bench.bench_generalization(kato_by_size, args.sizes, args.count, args.seed)
    _emit(rows, args.out)
    for line in bench.summarize(rows, ("policy", "n")):
        log.info("%s", line)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kato", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, count=100):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--count", type=int, default=count)

    p = sub.add_parser("gen", help="sample scenarios into a dataset directory")
    common(p)
    p.add_argument("--n", type=int, default=20, help="nodes per scenario, vehicle included")
    p.add_argument("--speed", type=float, default=bench.DEFAULT_SPEED)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("label", help="label a dataset with the exact solver")
    p.add_argument("--dataset", required=True)
    p.add_argument("--solver", choices=("prefix", "bruteforce"), default="prefix")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="unused; labeling is deterministic")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("train", help="train a selection model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--arch", choices=("kato", "sa", "mlp"), default="kato")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--hidden", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    def scenario_source(p):
        common(p, count=10)
        p.add_argument("--dataset", help="evaluate a dataset split instead of fresh scenarios")
        p.add_argument("--split", default="test")
        p.add_argument("--n", type=int, default=20)
        p.add_argument("--speed", type=float, default=bench.DEFAULT_SPEED)

    p = sub.add_parser("eval", help="evaluate policies and write a report")
    scenario_source(p)
    p.add_argument("--policies", type=_csv, default=["optimal", "kato"])
    p.add_argument("--model", action="append")
    p.add_argument("--mobcheck", type=_on_off, default=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("solve", help="run one policy on one stored scenario")
    p.add_argument("--scenario", required=True, help="scenario JSONL file")
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--policy", default="optimal")
    p.add_argument("--model", action="append")
    p.add_argument("--mobcheck", type=_on_off, default=True)
    p.add_argument("--seed", type=int, default=0, help="unused; solving is deterministic")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run one of the four experiments")
    p.add_argument("experiment", choices=("success-rate", "delay", "runtime", "generalization"))
    common(p, count=10)
    p.add_argument("--sizes", "--n", type=_ints, default=list(bench.SIZES))
    p.add_argument("--speeds", type=_floats, default=list(bench.SPEEDS))
    p.add_argument("--speed", type=float, default=bench.DEFAULT_SPEED)
    p.add_argument("--policies", type=_csv, default=list(bench.BASELINES))
    p.add_argument("--model", action="append")
    p.add_argument("--mobcheck", type=_on_off, default=None)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "policies", None):
        try:
            args.policies = [canonical_policy(p) for p in args.policies]
        except ValueError as exc:
            parser.error(str(exc))
    if args.command == "bench":
        args.mobcheck_given = args.mobcheck is not None
        args.mobcheck = True if args.mobcheck is None else args.mobcheck
    try:
        args.func(args)
    except (ValueError, OSError, datasets.DatasetCorruptionError) as exc:
        print(f"kato: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
