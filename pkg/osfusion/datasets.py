# osfusion/datasets.py
"""Labeled tabular datasets: CSV loading, train/validation/test splits, synthetic blobs."""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from sklearn.preprocessing import LabelEncoder, StandardScaler

from .exceptions import DatasetError, EmptySplitError, InvalidInputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    """
    P patterns x D features with integer labels in [0, n_classes).

    Attributes:
        features: (P, D) float array
        labels: (P,) int array
        n_classes: number of classes L
        class_values: original label value for each class index
    """
    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    class_values: tuple = field(default=())

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        if features.ndim != 2:
            raise InvalidInputError(f"features must be 2-D, got shape {features.shape}")
        if labels.shape != (features.shape[0],):
            raise InvalidInputError(
                f"need one label per pattern: {features.shape[0]} patterns, labels shape {labels.shape}"
            )
        if not np.all(np.isfinite(features)):
            raise InvalidInputError("features contain missing or non-finite values")
        if self.n_classes < 2:
            raise InvalidInputError(f"a dataset needs at least 2 classes, got {self.n_classes}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise InvalidInputError(f"labels must lie in [0, {self.n_classes})")
        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'labels', labels)

    def __len__(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def subset(self, indices):
        indices = np.asarray(indices, dtype=int)
        return Dataset(
            features=self.features[indices],
            labels=self.labels[indices],
            n_classes=self.n_classes,
            class_values=self.class_values,
        )


@dataclass(frozen=True)
class SplitSpec:
    """Fractions of the data for training, validation and testing (sum to 1)."""
    train_frac: float = 0.5
    val_frac: float = 0.25
    test_frac: float = 0.25
    seed: int = 0

    def __post_init__(self):
        fractions = (self.train_frac, self.val_frac, self.test_frac)
        if any(not frac > 0 for frac in fractions):
            raise InvalidInputError(f"split fractions must be positive, got {fractions}")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise InvalidInputError(f"split fractions must sum to 1, got {sum(fractions)}")


def load_dataset(path):
    """
    Load a labeled CSV: numeric feature columns, integer class label last.

    Features are standardized per column over the whole file; labels are
    remapped to 0..L-1 in increasing order of their values.

    Raises:
        DatasetError: on ragged rows, non-numeric or missing cells, a
            non-integer label, or a file holding a single class. The message
            names the offending line.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(
            path, header=None, dtype=str, keep_default_na=False,
            skip_blank_lines=False, skipinitialspace=True,
        )
    except pd.errors.ParserError as exc:
        raise DatasetError(f"{path}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise DatasetError(f"{path} is empty") from exc

    frame = frame.fillna('').map(str.strip)
    frame = frame[(frame != '').any(axis=1)]
    if frame.empty:
        raise DatasetError(f"{path} has no data rows")
    if frame.shape[1] < 2:
        raise DatasetError(f"{path} needs at least one feature column and a label column")

    missing = frame == ''
    if missing.to_numpy().any():
        row = missing.any(axis=1).idxmax()
        raise DatasetError(f"missing value in {path}", line=int(row) + 1)

    numeric = frame.apply(pd.to_numeric, errors='coerce')
    bad = numeric.isna()
    if bad.to_numpy().any():
        row = bad.any(axis=1).idxmax()
        column = int(bad.loc[row].to_numpy().argmax())
        raise DatasetError(
            f"non-numeric value {frame.loc[row].iloc[column]!r} in column {column + 1} of {path}",
            line=int(row) + 1,
        )

    values = numeric.to_numpy(dtype=float)
    raw_labels = values[:, -1]
    fractional = raw_labels != np.round(raw_labels)
    if fractional.any():
        row = numeric.index[int(fractional.argmax())]
        raise DatasetError(f"class label {raw_labels[fractional.argmax()]} is not an integer",
                           line=int(row) + 1)

    encoder = LabelEncoder()
    labels = encoder.fit_transform(raw_labels.astype(int))
    class_values = encoder.classes_
    if class_values.size < 2:
        raise DatasetError(f"{path} holds a single class ({class_values[0]})")

    dataset = Dataset(
        features=StandardScaler().fit_transform(values[:, :-1]),
        labels=labels,
        n_classes=int(class_values.size),
        class_values=tuple(int(v) for v in class_values),
    )
    logger.info("loaded %s: %d patterns, %d features, %d classes",
                path, len(dataset), dataset.n_features, dataset.n_classes)
    return dataset


def split(dataset, spec):
    """
    Shuffle and partition into (train, validation, test).

    Validation and test sizes are the floors of their fractions of P; the
    remainder goes to training.

    Raises:
        EmptySplitError: if any partition would be empty
    """
    size = len(dataset)
    n_val = math.floor(size * spec.val_frac + 1e-9)
    n_test = math.floor(size * spec.test_frac + 1e-9)
    n_train = size - n_val - n_test
    if min(n_train, n_val, n_test) < 1:
        raise EmptySplitError(
            f"{size} patterns cannot fill train/validation/test = {n_train}/{n_val}/{n_test}"
        )

    order = np.random.default_rng(spec.seed).permutation(size)
    train_idx = order[:n_train]
    val_idx = order[n_train:n_train + n_val]
    test_idx = order[n_train + n_val:]
    return dataset.subset(train_idx), dataset.subset(val_idx), dataset.subset(test_idx)


def make_blobs(n_patterns, n_classes=2, dims=2, separation=3.0, seed=0):
    """
    Gaussian blobs with unit covariance, one per class.

    Class c is centred at ``c * separation`` on the first axis (shifted so the
    centres are symmetric about the origin). Classes are balanced.
    """
    if n_patterns < n_classes:
        raise InvalidInputError(f"need at least {n_classes} patterns, got {n_patterns}")
    if n_classes < 2 or dims < 1:
        raise InvalidInputError("blobs need at least 2 classes and 1 dimension")

    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n_patterns) % n_classes)
    centres = np.zeros((n_classes, dims))
    centres[:, 0] = (np.arange(n_classes) - (n_classes - 1) / 2.0) * separation
    features = centres[labels] + rng.standard_normal((n_patterns, dims))
    return Dataset(
        features=features,
        labels=labels,
        n_classes=n_classes,
        class_values=tuple(range(n_classes)),
    )


def write_dataset_csv(dataset, path):
    """Write features and original label values as a header-less CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(dataset.features)
    values = np.asarray(dataset.class_values or range(dataset.n_classes))
    frame['label'] = values[dataset.labels]
    frame.to_csv(path, header=False, index=False, float_format='%.10g')
    logger.info("wrote %d patterns to %s", len(dataset), path)
