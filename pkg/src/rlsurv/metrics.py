"""Binary classification metrics with FAILURE (label 1) as the positive class."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FEATURES, Dataset
from .errors import InvalidArgument


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def as_array(self) -> np.ndarray:
        """``[[tn, fp], [fn, tp]]`` indexed as ``[label, prediction]``."""
        return np.array([[self.tn, self.fp], [self.fn, self.tp]])


def confusion(preds, labels) -> ConfusionMatrix:
    p = np.asarray(preds).reshape(-1)
    y = np.asarray(labels).reshape(-1)
    if p.shape != y.shape:
        raise InvalidArgument(f"{p.size} predictions for {y.size} labels")
    if not (np.isin(p, (0, 1)).all() and np.isin(y, (0, 1)).all()):
        raise InvalidArgument("predictions and labels must be 0 or 1")
    p = p.astype(bool)
    y = y.astype(bool)
    return ConfusionMatrix(tp=int(np.sum(p & y)), fp=int(np.sum(p & ~y)),
                           fn=int(np.sum(~p & y)), tn=int(np.sum(~p & ~y)))


def _ratio(num, den) -> float:
    return num / den if den else 0.0


def precision(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tp, cm.tp + cm.fp)


def recall(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tp, cm.tp + cm.fn)


def f1(cm: ConfusionMatrix) -> float:
    """Harmonic mean of precision and recall; every 0/0 counts as 0."""
    p, r = precision(cm), recall(cm)
    return _ratio(2 * p * r, p + r)


def f1_score(preds, labels) -> float:
    return f1(confusion(preds, labels))


@dataclass(frozen=True)
class EvalReport:
    algorithm: str
    device: str
    test_fraction: float
    seed: int
    cm: ConfusionMatrix
    train_seconds: float = 0.0

    @property
    def precision(self) -> float:
        return precision(self.cm)

    @property
    def recall(self) -> float:
        return recall(self.cm)

    @property
    def f1(self) -> float:
        return f1(self.cm)

    @property
    def key(self):
        return (self.device, self.algorithm, self.test_fraction, self.seed)


def evaluate(algorithm, device, test_fraction, seed, preds, labels,
             train_seconds=0.0) -> EvalReport:
    return EvalReport(algorithm, device, float(test_fraction), int(seed),
                      confusion(preds, labels), float(train_seconds))


@dataclass(frozen=True)
class FeatureRange:
    feature: str
    train_min: float
    train_max: float
    test_min: float
    test_max: float

    @property
    def min_outside(self) -> bool:
        return self.test_min < self.train_min

    @property
    def max_outside(self) -> bool:
        return self.test_max > self.train_max


def range_table(train: Dataset, test: Dataset) -> list:
    """Per-feature training and test envelopes, flagging test bounds outside training."""
    if len(train) == 0 or len(test) == 0:
        raise InvalidArgument("range_table needs non-empty train and test sets")
    lo_tr, hi_tr = train.features.min(axis=0), train.features.max(axis=0)
    lo_te, hi_te = test.features.min(axis=0), test.features.max(axis=0)
    return [FeatureRange(name, float(lo_tr[j]), float(hi_tr[j]), float(lo_te[j]), float(hi_te[j]))
            for j, name in enumerate(FEATURES)]


def n_flags(table) -> int:
    return sum(int(r.min_outside) + int(r.max_outside) for r in table)
