"""Supervised ANN baseline: same topology as the Q-network, trained on labels."""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import nn
from .dataset import Dataset
from .errors import InvalidArgument
from .metrics import f1_score


@dataclass
class AnnConfig:
    layer_sizes: tuple = (4, 128, 64, 32, 2)
    learning_rate: float = 0.0025
    batch_size: int = 32
    epochs: int = 100
    class_weighting: str = "none"
    seed: int = 0

    def __post_init__(self):
        self.layer_sizes = tuple(int(n) for n in self.layer_sizes)
        if self.epochs < 1:
            raise InvalidArgument("epochs must be at least 1")
        if self.batch_size < 1:
            raise InvalidArgument("batch_size must be positive")
        if self.class_weighting not in ("none", "balanced"):
            raise InvalidArgument(f"unknown class_weighting {self.class_weighting!r}")
        if self.layer_sizes[-1] != 2:
            raise InvalidArgument("the classifier needs exactly 2 outputs")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["layer_sizes"] = list(self.layer_sizes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AnnConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise InvalidArgument(f"unknown AnnConfig field(s): {', '.join(sorted(unknown))}")
        return cls(**d)


def softmax_xent_loss_and_grad(logits, labels, class_weights=(1.0, 1.0)):
    """Weighted softmax cross-entropy, mean over the batch.

    Returns ``(loss, grad)`` with ``grad[i] = w[y_i] * (softmax_i - onehot_i) / B``.
    """
    z = np.asarray(logits, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if z.ndim != 2 or y.shape != (z.shape[0],):
        raise InvalidArgument(f"logits {z.shape} and labels {y.shape} do not line up")
    w = np.asarray(class_weights, dtype=np.float64)[y]
    shifted = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(len(y))
    nll = log_norm - shifted[rows, y]
    probs = np.exp(shifted - log_norm[:, None])
    probs[rows, y] -= 1.0
    batch = len(y)
    return float(np.sum(w * nll) / batch), probs * (w / batch)[:, None]


def predict_ann(net: nn.Mlp, states) -> np.ndarray:
    return np.argmax(nn.forward(net, np.atleast_2d(states)), axis=1)


@dataclass
class AnnResult:
    net: nn.Mlp
    curve: list = field(default_factory=list)  # (epoch, val_f1, mean_train_loss)
    best_epoch: int = 0
    best_val_f1: float = float("nan")
    n_updates: int = 0
    train_seconds: float = 0.0


def train_ann(cfg: AnnConfig, train_set: Dataset, val_set: Dataset | None = None) -> AnnResult:
    """Mini-batch Adam over reshuffled epochs; keeps the best-validation-F1 epoch."""
    if train_set.n_failure == 0 or train_set.n_normal == 0:
        raise InvalidArgument(f"training set {train_set.name!r} must contain both classes")
    seeds = np.random.SeedSequence(cfg.seed).spawn(2)
    net = nn.init_mlp(cfg.layer_sizes, seeds[0])
    opt = nn.init_optimizer(net, "adam", cfg.learning_rate)
    rng = np.random.default_rng(seeds[1])

    n = len(train_set)
    if cfg.class_weighting == "balanced":
        weights = (n / (2.0 * train_set.n_normal), n / (2.0 * train_set.n_failure))
    else:
        weights = (1.0, 1.0)
    x, y = train_set.features, train_set.labels
    n_batches = math.ceil(n / cfg.batch_size)

    result = AnnResult(net)
    best = None
    start = time.perf_counter()
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        losses = []
        for b in range(n_batches):
            idx = order[b * cfg.batch_size:(b + 1) * cfg.batch_size]
            trace = nn.forward_trace(net, x[idx])
            loss, grad = softmax_xent_loss_and_grad(trace[-1], y[idx], weights)
            nn.optimizer_step(net, nn.backward(net, x[idx], grad, trace=trace), opt)
            losses.append(loss)
            result.n_updates += 1
        score = float("nan")
        if val_set is not None and len(val_set):
            score = f1_score(predict_ann(net, val_set.features), val_set.labels)
            if best is None or score >= result.best_val_f1:
                best = net.params.copy()
                result.best_val_f1 = score
                result.best_epoch = epoch
        result.curve.append((epoch, score, float(np.mean(losses))))
    result.train_seconds = time.perf_counter() - start

    if best is not None:
        net.params[...] = best
    else:
        result.best_epoch = cfg.epochs
    return result
