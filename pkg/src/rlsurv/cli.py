"""Command-line entry point: ``rlsurv {generate,train,evaluate,compare,report}``."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import agents, baseline, dataset, experiment, nn, report
from .env import REWARD_SCHEMES
from .errors import InvalidArgument

CHECKPOINT_FORMAT = "rlsurv-checkpoint"
TRAIN_FIELDS = ("algorithm", "test_fraction", "val_fraction", "reward_scheme", "scaler",
                "seed", "agent", "ann")


class UsageError(Exception):
    pass


def _env_seed(default):
    raw = os.environ.get("RLSURV_SEED")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"RLSURV_SEED must be an integer, got {raw!r}") from None


def _fraction(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"test fraction must be in (0, 1), got {value}")
    return value


def _read_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return doc


def _add_agent_flags(p):
    p.add_argument("--total-steps", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--lr", type=float, help="learning rate (agents and ANN)")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--target-sync", type=int, help="target network copy period in steps")
    p.add_argument("--epsilon-end", type=float)
    p.add_argument("--reward-scheme", choices=REWARD_SCHEMES)


def _agent_overrides(args) -> dict:
    pairs = {"total_steps": args.total_steps, "gamma": args.gamma,
             "learning_rate": args.lr, "batch_size": args.batch_size,
             "target_sync_period": args.target_sync, "epsilon_end": args.epsilon_end}
    return {k: v for k, v in pairs.items() if v is not None}


def _ann_overrides(args) -> dict:
    pairs = {"learning_rate": args.lr, "batch_size": args.batch_size}
    return {k: v for k, v in pairs.items() if v is not None}


# -- generate ---------------------------------------------------------------

def cmd_generate(args) -> int:
    overrides = {}
    if args.config:
        overrides.update(_read_json(args.config))
    name = overrides.pop("preset", args.preset)
    if name not in dataset.PRESETS:
        raise UsageError(f"unknown preset {name!r}; available presets: {', '.join(dataset.PRESETS)}")
    seed = args.seed if args.seed is not None else _env_seed(None)
    if seed is not None:
        overrides["seed"] = seed
    if args.overlap is not None:
        overrides["overlap"] = args.overlap
    try:
        spec = dataset.preset(name, **overrides)
    except TypeError as exc:
        raise UsageError(f"bad device spec field: {exc}") from None
    ds = dataset.generate(spec)
    dataset.save_csv(ds, args.out)
    print(f"{args.out}: {len(ds)} rows, {ds.n_normal} normal, {ds.n_failure} failure")
    return 0


# -- train ------------------------------------------------------------------

def _train_settings(args) -> dict:
    settings = {"algorithm": "ddqn", "test_fraction": 0.2, "val_fraction": 0.2,
                "reward_scheme": "balanced", "scaler": "minmax", "seed": _env_seed(0),
                "agent": {}, "ann": {}}
    if args.config:
        doc = _read_json(args.config)
        for key in doc:
            if key not in TRAIN_FIELDS:
                raise UsageError(f"unknown config field {key!r}")
        settings.update(doc)
    for key, value in (("algorithm", args.algorithm), ("test_fraction", args.test_fraction),
                       ("reward_scheme", args.reward_scheme), ("seed", args.seed)):
        if value is not None:
            settings[key] = value
    settings["agent"] = {**settings["agent"], **_agent_overrides(args)}
    settings["ann"] = {**settings["ann"], **_ann_overrides(args)}
    if settings["algorithm"] not in experiment.ALGORITHMS:
        raise UsageError(f"algorithm: unknown algorithm {settings['algorithm']!r}")
    if not 0.0 < float(settings["test_fraction"]) < 1.0:
        raise UsageError(f"test_fraction: {settings['test_fraction']} is not in (0, 1)")
    try:
        agents.AgentConfig.from_dict(settings["agent"])
        baseline.AnnConfig.from_dict(settings["ann"])
    except (InvalidArgument, TypeError) as exc:
        raise UsageError(str(exc)) from None
    return settings


def cmd_train(args) -> int:
    s = _train_settings(args)
    data = dataset.load_csv(args.data)
    parts = dataset.split(data, s["test_fraction"], s["val_fraction"], seed=s["seed"])
    scaler = dataset.fit_scaler(parts.train, s["scaler"])
    train_set = dataset.apply_scaler(scaler, parts.train)
    val_set = dataset.apply_scaler(scaler, parts.val)
    algo = s["algorithm"]

    if algo in agents.ALGORITHMS:
        cfg = agents.AgentConfig.from_dict({**s["agent"], "algorithm": algo, "seed": s["seed"]})
        from .env import EnvConfig
        res = agents.train(cfg, train_set, val_set, EnvConfig(reward_scheme=s["reward_scheme"],
                                                               seed=s["seed"]))
        doc = res.agent.to_dict()
        curve, unit, seconds = res.curve, "step", res.train_seconds
    else:
        cfg = baseline.AnnConfig.from_dict({**s["ann"], "seed": s["seed"]})
        res = baseline.train_ann(cfg, train_set, val_set)
        doc = {"model": nn.mlp_to_dict(res.net, "adam"), "config": cfg.to_dict(),
               "step_count": res.n_updates}
        curve, unit, seconds = res.curve, "epoch", res.train_seconds

    doc.update({"format": CHECKPOINT_FORMAT, "algorithm": algo, "scaler": scaler.to_dict(),
                "split": {"test_fraction": s["test_fraction"], "val_fraction": s["val_fraction"],
                          "seed": s["seed"]},
                "reward_scheme": s["reward_scheme"], "data": {"name": data.name, "rows": len(data)},
                "train_seconds": seconds})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "model.json").write_text(json.dumps(doc, indent=1))
    with open(out / "curve.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow((unit, "val_f1", "mean_loss"))
        writer.writerows(curve)
    print(f"{algo}: trained in {seconds:.1f}s, checkpoint {out / 'model.json'}")
    return 0


# -- evaluate ---------------------------------------------------------------

def _load_checkpoint(path):
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise InvalidArgument(f"{path} is not an rlsurv checkpoint")
    return doc


def cmd_evaluate(args) -> int:
    data = dataset.load_csv(args.data)
    device = args.device or data.name
    if args.model:
        doc = _load_checkpoint(args.model)
        sp = doc["split"]
        parts = dataset.split(data, sp["test_fraction"], sp["val_fraction"], seed=sp["seed"])
        scaler = dataset.Scaler.from_dict(doc["scaler"])
        net = nn.mlp_from_dict(doc["model"])
        test = dataset.apply_scaler(scaler, parts.test)
        preds = baseline.predict_ann(net, test.features)  # greedy argmax, ties -> 0
        rep = report.evaluate(doc["algorithm"], device, sp["test_fraction"], sp["seed"],
                              preds, test.labels, doc.get("train_seconds", 0.0))
    else:
        if args.test_fraction is None or not args.algorithm:
            raise UsageError("--predictions needs --algorithm and --test-fraction")
        seed = args.seed if args.seed is not None else _env_seed(0)
        parts = dataset.split(data, args.test_fraction, args.val_fraction, seed=seed)
        rep = report.report_from_predictions(args.predictions, parts, args.algorithm, device,
                                             args.test_fraction, seed)
    print(f"{rep.algorithm} on {rep.device} (test fraction {rep.test_fraction:g}, seed {rep.seed}): "
          f"tp={rep.cm.tp} fp={rep.cm.fp} fn={rep.cm.fn} tn={rep.cm.tn} "
          f"precision={rep.precision:.4f} recall={rep.recall:.4f} f1={rep.f1:.4f}")
    if args.out:
        report.emit_report([rep], args.out)
    return 0


# -- compare / report -------------------------------------------------------

def _experiment_config(args) -> experiment.ExperimentConfig:
    doc = _read_json(args.config) if args.config else {}
    devices = (args.preset or []) + (args.data or [])
    flags = {"devices": devices or None, "algorithms": args.algorithm,
             "test_fractions": args.test_fraction, "seeds": args.seed,
             "out": args.out, "jobs": args.jobs, "reward_scheme": args.reward_scheme}
    if args.no_timing:
        flags["record_timing"] = False
    doc.update({k: v for k, v in flags.items() if v is not None})
    if "seeds" not in doc and os.environ.get("RLSURV_SEED") is not None:
        doc["seeds"] = [_env_seed(0)]
    doc["agent"] = {**doc.get("agent", {}), **_agent_overrides(args)}
    doc["ann"] = {**doc.get("ann", {}), **_ann_overrides(args)}
    for d in doc.get("devices", []):
        if d not in dataset.PRESETS and not Path(d).exists():
            raise UsageError(f"devices: {d!r} is neither a preset ({', '.join(dataset.PRESETS)}) "
                             "nor an existing CSV file")
    try:
        return experiment.ExperimentConfig.from_dict(doc)
    except (InvalidArgument, TypeError) as exc:
        raise UsageError(str(exc)) from None


def cmd_compare(args) -> int:
    cfg = _experiment_config(args)
    runs = experiment.plan(cfg)
    print(f"{len(runs)} runs -> {cfg.out}", flush=True)
    progress = None if args.quiet else (
        lambda r: print(f"  {r.device} {r.algorithm} test={r.test_fraction:g} seed={r.seed} "
                        f"f1={r.f1:.4f} ({r.train_seconds:.1f}s)", flush=True))
    reports = experiment.run_experiment(cfg, progress)
    report.emit_report(reports, cfg.out)
    print(f"wrote {Path(cfg.out) / 'summary.md'}")
    return 0


def cmd_report(args) -> int:
    reports = []
    for path in args.inputs:
        reports.extend(report.read_comparison_csv(path))
    report.emit_report(reports, args.out)
    print(f"{len(reports)} runs -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rlsurv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic device dataset as CSV")
    p.add_argument("--preset", default="device1")
    p.add_argument("--seed", type=int)
    p.add_argument("--overlap", type=float)
    p.add_argument("--config", help="JSON document of DeviceSpec overrides")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train one model on a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--algorithm", choices=experiment.ALGORITHMS)
    p.add_argument("--test-fraction", type=_fraction)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--out", required=True, help="output directory")
    _add_agent_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a checkpoint or external predictions on a test split")
    p.add_argument("--data", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model")
    src.add_argument("--predictions", help="CSV with columns row_index,pred")
    p.add_argument("--algorithm")
    p.add_argument("--device")
    p.add_argument("--test-fraction", type=_fraction)
    p.add_argument("--val-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="run the algorithm x split x seed comparison")
    p.add_argument("--config")
    p.add_argument("--preset", action="append")
    p.add_argument("--data", action="append", help="CSV dataset used as an extra device")
    p.add_argument("--algorithm", action="append", choices=experiment.ALGORITHMS)
    p.add_argument("--test-fraction", action="append", type=_fraction)
    p.add_argument("--seed", action="append", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--no-timing", action="store_true",
                   help="write train_seconds as 0 so comparison.csv is byte-reproducible")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--out")
    _add_agent_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="rebuild report artifacts from comparison.csv files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except experiment.RunError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InvalidArgument, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
