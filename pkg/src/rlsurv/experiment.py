"""
Algorithm x split-ratio x seed comparison.

Each run is independent: stratified split, scaler fitted on the training
rows, training with the nested validation split, then a single evaluation on
the held-out test rows. The test rows are scaled and looked at only inside
:func:`_evaluate`.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import agents, baseline, dataset
from .dataset import Dataset
from .env import EnvConfig
from .errors import InvalidArgument
from .metrics import EvalReport, evaluate

ALGORITHMS = ("ddqn", "dqn", "ann")


@dataclass
class ExperimentConfig:
    devices: list = field(default_factory=lambda: list(dataset.PRESETS))
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    test_fractions: list = field(default_factory=lambda: [0.2, 0.5, 0.8])
    seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    val_fraction: float = 0.2
    scaler: str = "minmax"
    reward_scheme: str = "balanced"
    agent: dict = field(default_factory=dict)  # AgentConfig overrides
    ann: dict = field(default_factory=dict)  # AnnConfig overrides
    record_timing: bool = True
    out: str = "report"
    jobs: int = 1

    def __post_init__(self):
        if not self.devices:
            raise InvalidArgument("devices: at least one device is required")
        if not self.algorithms:
            raise InvalidArgument("algorithms: at least one algorithm is required")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise InvalidArgument(f"algorithms: unknown algorithm {a!r}")
        if not self.test_fractions:
            raise InvalidArgument("test_fractions: at least one fraction is required")
        for f in self.test_fractions:
            if not 0.0 < float(f) < 1.0:
                raise InvalidArgument(f"test_fractions: {f} is not in (0, 1)")
        if not self.seeds:
            raise InvalidArgument("seeds: at least one seed is required")
        if self.jobs < 1:
            raise InvalidArgument("jobs: must be at least 1")
        # validate override documents early so a typo fails before any training
        agents.AgentConfig.from_dict(self.agent)
        baseline.AnnConfig.from_dict(self.ann)
        EnvConfig(reward_scheme=self.reward_scheme)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise InvalidArgument(f"unknown config field(s): {', '.join(sorted(unknown))}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Run:
    device: str
    algorithm: str
    test_fraction: float
    seed: int

    def __str__(self):
        return (f"device={self.device} algorithm={self.algorithm} "
                f"test_fraction={self.test_fraction} seed={self.seed}")


class RunError(RuntimeError):
    def __init__(self, run: Run, cause: BaseException):
        super().__init__(f"run failed ({run}): {type(cause).__name__}: {cause}")
        self.run = run


def load_device(device: str) -> Dataset:
    """A preset name or a path to a CSV file."""
    if device in dataset.PRESETS:
        return dataset.generate(dataset.PRESETS[device])
    path = Path(device)
    if path.suffix.lower() == ".csv" or path.exists():
        return dataset.load_csv(path)
    raise InvalidArgument(
        f"unknown device {device!r}; use a CSV path or one of {', '.join(dataset.PRESETS)}")


def device_name(device: str) -> str:
    return device if device in dataset.PRESETS else Path(device).stem


@dataclass
class TrainedModel:
    algorithm: str
    predict: object
    train_seconds: float
    curve: list


def fit_model(algorithm: str, train_set: Dataset, val_set: Dataset, seed: int,
              agent_overrides=None, ann_overrides=None,
              reward_scheme: str = "balanced") -> TrainedModel:
    if algorithm in agents.ALGORITHMS:
        cfg = agents.AgentConfig.from_dict({**(agent_overrides or {}),
                                            "algorithm": algorithm, "seed": seed})
        env_cfg = EnvConfig(reward_scheme=reward_scheme, seed=seed)
        res = agents.train(cfg, train_set, val_set, env_cfg)
        return TrainedModel(algorithm, res.agent.predict, res.train_seconds, res.curve)
    if algorithm == "ann":
        cfg = baseline.AnnConfig.from_dict({**(ann_overrides or {}), "seed": seed})
        res = baseline.train_ann(cfg, train_set, val_set)
        net = res.net
        return TrainedModel(algorithm, lambda x: baseline.predict_ann(net, x),
                            res.train_seconds, res.curve)
    raise InvalidArgument(f"unknown algorithm {algorithm!r}")


def _evaluate(model: TrainedModel, scaler, test_raw: Dataset):
    test = dataset.apply_scaler(scaler, test_raw)
    return model.predict(test.features), test.labels


def run_one(run: Run, cfg: ExperimentConfig, data: Dataset | None = None) -> EvalReport:
    try:
        data = data if data is not None else load_device(run.device)
        parts = dataset.split(data, run.test_fraction, cfg.val_fraction, seed=run.seed)
        scaler = dataset.fit_scaler(parts.train, cfg.scaler)
        train_set = dataset.apply_scaler(scaler, parts.train)
        val_set = dataset.apply_scaler(scaler, parts.val)
        model = fit_model(run.algorithm, train_set, val_set, run.seed,
                          cfg.agent, cfg.ann, cfg.reward_scheme)
        preds, labels = _evaluate(model, scaler, parts.test)
    except Exception as exc:
        raise RunError(run, exc) from exc
    seconds = model.train_seconds if cfg.record_timing else 0.0
    return evaluate(run.algorithm, device_name(run.device), run.test_fraction, run.seed,
                    preds, labels, seconds)


def plan(cfg: ExperimentConfig) -> list:
    return [Run(d, a, float(f), int(s)) for d in cfg.devices for a in cfg.algorithms
            for f in cfg.test_fractions for s in cfg.seeds]


def _run_chunk(args):
    run, cfg = args
    return run_one(run, cfg)


def run_experiment(cfg: ExperimentConfig, progress=None) -> list:
    """All planned runs, sorted by (device, algorithm, fraction, seed)."""
    runs = plan(cfg)
    reports = []
    if cfg.jobs == 1:
        cache = {}
        for run in runs:
            if run.device not in cache:
                cache[run.device] = load_device(run.device)
            reports.append(run_one(run, cfg, cache[run.device]))
            if progress:
                progress(reports[-1])
    else:
        with ProcessPoolExecutor(max_workers=min(cfg.jobs, os.cpu_count() or 1)) as pool:
            for rep in pool.map(_run_chunk, [(r, cfg) for r in runs]):
                reports.append(rep)
                if progress:
                    progress(rep)
    order = {d: i for i, d in enumerate(device_name(d) for d in cfg.devices)}
    algo_order = {a: i for i, a in enumerate(ALGORITHMS)}
    return sorted(reports, key=lambda r: (order[r.device], algo_order[r.algorithm],
                                          r.test_fraction, r.seed))


def mean_f1(reports, device, algorithm, fraction) -> float:
    vals = [r.f1 for r in reports if (r.device, r.algorithm, r.test_fraction)
            == (device, algorithm, fraction)]
    return float(np.mean(vals)) if vals else float("nan")


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
