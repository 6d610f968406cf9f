"""Dataset ingestion and the preprocessing pipeline: CSV loading,
feature standardization, subsampling and train/test splitting.

All operations are pure: they return new ``Dataset`` / index objects and
never mutate their inputs, so values can be shared freely across threads
and worker processes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Dataset:
    """A pool of samples: an (n, d) feature matrix plus an n-vector of labels.

    Labels are +/-1 when loaded from benchmark CSVs and real-valued after
    label synthesis in the realizable setting.
    """

    features: np.ndarray
    labels: np.ndarray
    name: str = ""

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=float)
        if feats.ndim != 2:
            raise ValueError(f"features must be 2-d, got shape {feats.shape}")
        n, d = feats.shape
        if n < 2:
            raise ValueError(f"need at least 2 samples, got {n}")
        if d < 1:
            raise ValueError("need at least 1 feature column")
        if labels.shape != (n,):
            raise ValueError(f"labels shape {labels.shape} does not match {n} rows")
        if not np.all(np.isfinite(feats)) or not np.all(np.isfinite(labels)):
            raise ValueError("non-finite entries in features or labels")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class SplitIndices:
    """A disjoint, exhaustive train/test partition of row indices."""

    train: np.ndarray
    test: np.ndarray
    seed: int

    def __post_init__(self):
        train = np.asarray(self.train, dtype=np.intp)
        test = np.asarray(self.test, dtype=np.intp)
        merged = np.sort(np.concatenate([train, test]))
        if not np.array_equal(merged, np.arange(merged.size)):
            raise ValueError("train/test must partition 0..n-1 exactly")
        object.__setattr__(self, "train", train)
        object.__setattr__(self, "test", test)


def load_csv(path, label_column: str, binary_labels: bool = True, name: str | None = None) -> Dataset:
    """Read a UTF-8 comma-separated file with one header row into a Dataset.

    Every non-label column becomes a feature, in header order. With
    ``binary_labels`` (the default for benchmark data) each label must be
    exactly -1 or +1.
    """
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read dataset file {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ConfigError(f"{path}: label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)
        feat_cols = [i for i in range(len(header)) if i != label_idx]

        rows = []
        labels = []
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ConfigError(f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}")
            parsed = []
            for i in feat_cols:
                try:
                    parsed.append(float(row[i]))
                except ValueError:
                    raise ConfigError(
                        f"{path}: row {row_no}, column {header[i]!r}: non-numeric cell {row[i]!r}"
                    ) from None
            try:
                y = float(row[label_idx])
            except ValueError:
                raise ConfigError(
                    f"{path}: row {row_no}, column {label_column!r}: non-numeric cell {row[label_idx]!r}"
                ) from None
            if binary_labels and y not in (-1.0, 1.0):
                raise ConfigError(f"{path}: row {row_no}: non-binary label {row[label_idx]!r}")
            rows.append(parsed)
            labels.append(y)

    if len(rows) < 2:
        raise ConfigError(f"{path}: need at least 2 data rows, got {len(rows)}")
    return Dataset(np.array(rows, dtype=float), np.array(labels, dtype=float), name=name or str(path))


def standardize(d: Dataset) -> Dataset:
    """Center each feature column and scale it to unit population standard
    deviation. Constant columns become all-zeros instead of dividing by 0."""
    mean = d.features.mean(axis=0)
    sd = d.features.std(axis=0)  # population form, ddof=0
    safe = np.where(sd > 0.0, sd, 1.0)
    feats = (d.features - mean) / safe
    feats[:, sd == 0.0] = 0.0
    return Dataset(feats, d.labels, name=d.name)


def subsample(d: Dataset, max_n: int = 1000, seed: int = 0) -> Dataset:
    """Uniform sample without replacement down to ``max_n`` rows; a no-op
    when the dataset is already small enough."""
    if max_n < 2:
        raise ConfigError(f"max_n must be >= 2, got {max_n}")
    if d.n <= max_n:
        return d
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(d.n, size=max_n, replace=False))
    return Dataset(d.features[idx], d.labels[idx], name=d.name)


def split(d: Dataset, train_frac: float = 0.65, seed: int = 0) -> SplitIndices:
    """Random train/test partition with |train| = round(train_frac * n)."""
    if not 0.0 < train_frac < 1.0:
        raise ConfigError(f"train_frac must be in (0, 1), got {train_frac}")
    if d.n < 3:
        raise ValueError(f"need at least 3 samples to split, got {d.n}")
    k = int(np.floor(train_frac * d.n + 0.5))
    perm = np.random.default_rng(seed).permutation(d.n)
    return SplitIndices(train=np.sort(perm[:k]), test=np.sort(perm[k:]), seed=seed)
