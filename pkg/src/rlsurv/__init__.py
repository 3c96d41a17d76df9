"""
rlsurv: reinforcement-learning classifiers for rare device failures.

A numpy-only toolkit that treats each sensor row as a one-step decision:
an agent answers NORMAL or FAILURE and is rewarded by a class-balanced
scheme. DQN and Double-DQN agents are compared against a supervised ANN
with the same topology, on synthetic device data, across train/test ratios.

Typical use::

    from rlsurv import dataset, agents, metrics

    ds = dataset.generate(dataset.preset("device1"))
    train, val, test = dataset.split(ds, test_fraction=0.2, seed=0)
    scaler = dataset.fit_scaler(train)
    train, val, test = (dataset.apply_scaler(scaler, d) for d in (train, val, test))
    result = agents.train(agents.AgentConfig(algorithm="ddqn"), train, val)
    print(metrics.f1_score(result.agent.predict(test.features), test.labels))
"""
from .agents import Agent, AgentConfig, TrainResult, epsilon_at, train
from .baseline import AnnConfig, AnnResult, predict_ann, train_ann
from .dataset import (Dataset, DeviceSpec, Scaler, Split, apply_scaler, fit_scaler, generate,
                      load_csv, preset, save_csv, split)
from .env import ClassificationEnv, EnvConfig, reward_for
from .errors import (InvalidArgument, InvalidState, NotReady, NumericFailure, ParseError,
                     SchemaError)
from .experiment import ExperimentConfig, Run, run_experiment
from .metrics import ConfusionMatrix, EvalReport, confusion, f1, f1_score, range_table
from .replay import Batch, ReplayBuffer, Transition
from .report import emit_report

__version__ = "0.1.0"

__all__ = [
    "Agent", "AgentConfig", "TrainResult", "epsilon_at", "train",
    "AnnConfig", "AnnResult", "predict_ann", "train_ann",
    "Dataset", "DeviceSpec", "Scaler", "Split", "apply_scaler", "fit_scaler", "generate",
    "load_csv", "preset", "save_csv", "split",
    "ClassificationEnv", "EnvConfig", "reward_for",
    "InvalidArgument", "InvalidState", "NotReady", "NumericFailure", "ParseError", "SchemaError",
    "ExperimentConfig", "Run", "run_experiment",
    "ConfusionMatrix", "EvalReport", "confusion", "f1", "f1_score", "range_table",
    "Batch", "ReplayBuffer", "Transition",
    "emit_report",
]
