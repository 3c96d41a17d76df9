"""
Device telemetry: synthetic generation, CSV I/O, stratified splits, scaling.

Rows carry four sensor readings (volt, rotate, pressure, vibration) and a
binary label, 0 for NORMAL and 1 for FAILURE. The three device presets
reproduce the published class counts (8717/44, 8720/41, 8721/40) and their
per-feature spreads approximate the published min/max ranges.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import InvalidArgument, ParseError, SchemaError

FEATURES = ("volt", "rotate", "pressure", "vibration")
LABEL = "label"
NORMAL, FAILURE = 0, 1


@dataclass(eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64).reshape(-1, len(FEATURES))
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if len(self.features) != len(self.labels):
            raise InvalidArgument(
                f"{len(self.features)} feature rows but {len(self.labels)} labels")
        if not np.isfinite(self.features).all():
            raise InvalidArgument("features must be finite")
        if not np.isin(self.labels, (NORMAL, FAILURE)).all():
            raise InvalidArgument("labels must be 0 or 1")

    def __len__(self):
        return len(self.labels)

    @property
    def n_failure(self) -> int:
        return int(self.labels.sum())

    @property
    def n_normal(self) -> int:
        return len(self) - self.n_failure

    def subset(self, index, name=None) -> "Dataset":
        return Dataset(self.features[index], self.labels[index], name or self.name)


@dataclass(frozen=True)
class DeviceSpec:
    """Two-regime Gaussian mixture.

    Normal rows are drawn from ``N(normal_mean, normal_std)`` per feature.
    A fraction ``overlap`` of the failure rows also comes from the normal
    regime (these are indistinguishable by construction); the rest are drawn
    from ``N(normal_mean + failure_shift, normal_std * failure_std_scale)``.
    """

    name: str
    n_normal: int
    n_failure: int
    normal_mean: tuple = (170.0, 450.0, 100.0, 40.0)
    normal_std: tuple = (15.0, 50.0, 10.0, 5.0)
    failure_shift: tuple = (45.0, -100.0, 30.0, 15.0)
    failure_std_scale: float = 1.0
    overlap: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.n_normal < 1 or self.n_failure < 1:
            raise InvalidArgument("both class counts must be positive")
        if not 0.0 <= self.overlap <= 1.0:
            raise InvalidArgument("overlap must lie in [0, 1]")
        for name in ("normal_mean", "normal_std", "failure_shift"):
            if len(getattr(self, name)) != len(FEATURES):
                raise InvalidArgument(f"{name} needs {len(FEATURES)} entries")
        if min(self.normal_std) < 0 or self.failure_std_scale < 0:
            raise InvalidArgument("standard deviations must be non-negative")


PRESETS = {
    "device1": DeviceSpec("device1", 8717, 44, seed=1),
    "device2": DeviceSpec("device2", 8720, 41,
                          normal_mean=(168.0, 440.0, 102.0, 41.0),
                          normal_std=(17.0, 56.0, 10.5, 5.4), seed=2),
    "device3": DeviceSpec("device3", 8721, 40,
                          normal_mean=(171.0, 452.0, 99.0, 40.5),
                          normal_std=(14.5, 50.0, 10.0, 4.8), seed=3),
}


def preset(name: str, **overrides) -> DeviceSpec:
    try:
        spec = PRESETS[name]
    except KeyError:
        raise InvalidArgument(
            f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return replace(spec, **overrides) if overrides else spec


def generate(spec: DeviceSpec) -> Dataset:
    rng = np.random.default_rng(spec.seed)
    mean = np.asarray(spec.normal_mean, dtype=np.float64)
    std = np.asarray(spec.normal_std, dtype=np.float64)

    n_hidden = int(round(spec.overlap * spec.n_failure))
    normal = mean + std * rng.standard_normal((spec.n_normal, len(FEATURES)))
    hidden = mean + std * rng.standard_normal((n_hidden, len(FEATURES)))
    n_shifted = spec.n_failure - n_hidden
    shifted = (mean + np.asarray(spec.failure_shift, dtype=np.float64)
               + spec.failure_std_scale * std * rng.standard_normal((n_shifted, len(FEATURES))))

    x = np.vstack([normal, hidden, shifted])
    y = np.concatenate([np.zeros(spec.n_normal, np.int64), np.ones(spec.n_failure, np.int64)])
    # interleave failures through the record the way a sensor log would have them
    order = rng.permutation(len(y))
    return Dataset(x[order], y[order], spec.name)


# -- CSV --------------------------------------------------------------------

def save_csv(ds: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow((*FEATURES, LABEL))
        for row, label in zip(ds.features, ds.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def load_csv(path, name: str | None = None) -> Dataset:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        for col in (*FEATURES, LABEL):
            if col not in header:
                raise SchemaError(f"{path}: missing column {col!r}")
        cols = [header.index(c) for c in FEATURES]
        label_col = header.index(LABEL)
        rows, labels = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                values = [float(rec[c]) for c in cols]
                raw_label = float(rec[label_col])
            except (ValueError, IndexError):
                raise ParseError(f"{path}: row {lineno} has a missing or non-numeric cell") from None
            if raw_label not in (0.0, 1.0):
                raise SchemaError(f"{path}: row {lineno} label {rec[label_col]!r} is not 0 or 1")
            rows.append(values)
            labels.append(int(raw_label))
    return Dataset(np.array(rows, dtype=np.float64).reshape(-1, len(FEATURES)),
                   np.array(labels, dtype=np.int64), name or path.stem)


# -- splitting --------------------------------------------------------------

def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(eq=False)
class Split:
    train: Dataset
    val: Dataset
    test: Dataset
    train_index: np.ndarray = field(repr=False)
    val_index: np.ndarray = field(repr=False)
    test_index: np.ndarray = field(repr=False)

    def __iter__(self):
        return iter((self.train, self.val, self.test))


def split(ds: Dataset, test_fraction: float, val_fraction_of_train: float = 0.2,
          seed: int = 0) -> Split:
    """Stratified train/val/test partition.

    Per class, ``round(test_fraction * count)`` rows go to test; of the rest,
    ``round(val_fraction_of_train * remaining)`` go to validation. Rounding is
    half-up. Row order inside each split follows the seeded shuffle.
    """
    if not 0.0 < test_fraction < 1.0:
        raise InvalidArgument(f"test_fraction must be in (0, 1), got {test_fraction}")
    if not 0.0 <= val_fraction_of_train < 1.0:
        raise InvalidArgument(f"val_fraction_of_train must be in [0, 1), got {val_fraction_of_train}")
    rng = np.random.default_rng(seed)
    parts = {"train": [], "val": [], "test": []}
    for cls in (NORMAL, FAILURE):
        idx = np.flatnonzero(ds.labels == cls)
        idx = idx[rng.permutation(len(idx))]
        n_test = _round_half_up(test_fraction * len(idx))
        n_val = _round_half_up(val_fraction_of_train * (len(idx) - n_test))
        parts["test"].append(idx[:n_test])
        parts["val"].append(idx[n_test:n_test + n_val])
        parts["train"].append(idx[n_test + n_val:])
        if cls == FAILURE and len(parts["train"][-1]) < 2:
            raise InvalidArgument(
                f"only {len(parts['train'][-1])} minority rows left for training "
                f"({len(idx)} available, test_fraction={test_fraction})")

    out = {}
    for key, chunks in parts.items():
        index = np.concatenate(chunks)
        out[key] = index[rng.permutation(len(index))]
    return Split(ds.subset(out["train"], f"{ds.name}/train"),
                 ds.subset(out["val"], f"{ds.name}/val"),
                 ds.subset(out["test"], f"{ds.name}/test"),
                 out["train"], out["val"], out["test"])


# -- scaling ----------------------------------------------------------------

@dataclass(frozen=True)
class Scaler:
    """Per-feature affine map fitted on training rows only.

    ``offset`` and ``scale`` are min/range for minmax and mean/std for
    zscore. A constant feature gets scale 1 so it maps to 0.
    """

    mode: str
    offset: tuple
    scale: tuple

    def transform(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - np.asarray(self.offset)) / np.asarray(self.scale)

    def inverse(self, z) -> np.ndarray:
        return np.asarray(z, dtype=np.float64) * np.asarray(self.scale) + np.asarray(self.offset)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "offset": [repr(v) for v in self.offset],
                "scale": [repr(v) for v in self.scale]}

    @classmethod
    def from_dict(cls, doc: dict) -> "Scaler":
        return cls(doc["mode"], tuple(float(v) for v in doc["offset"]),
                   tuple(float(v) for v in doc["scale"]))


def fit_scaler(train: Dataset, mode: str = "minmax") -> Scaler:
    if len(train) == 0:
        raise InvalidArgument("cannot fit a scaler on an empty dataset")
    x = train.features
    if mode == "minmax":
        offset = x.min(axis=0)
        scale = x.max(axis=0) - offset
    elif mode == "zscore":
        offset = x.mean(axis=0)
        scale = x.std(axis=0)
    else:
        raise InvalidArgument(f"unknown scaler mode {mode!r}")
    scale = np.where(scale > 0, scale, 1.0)
    return Scaler(mode, tuple(float(v) for v in offset), tuple(float(v) for v in scale))


def apply_scaler(scaler: Scaler, ds: Dataset) -> Dataset:
    return Dataset(scaler.transform(ds.features), ds.labels.copy(), ds.name)
