# osfusion/mlp.py
"""
Single-hidden-layer perceptron trained by mini-batch gradient descent.

Sigmoid hidden and output units, one output per class, squared error
against one-of-L targets, so each output approximates a class posterior.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .exceptions import InvalidInputError, TrainingFailureError

logger = logging.getLogger(__name__)

# hidden units per benchmark dataset
ARCHITECTURES = {
    'cancer': 10,
    'card': 20,
    'diabetes': 10,
    'gene': 20,
    'glass': 15,
    'soybean': 40,
    'sonar': 50,
}


@dataclass(frozen=True)
class MLPConfig:
    """
    Attributes:
        hidden_units: size of the hidden layer
        epochs: maximum number of passes over the training set
        learning_rate: gradient step size
        seed: seeds initialization and batch order
        early_stop_fraction: 1.0 keeps the best-validation epoch ("fine
            tuned"); 0.5 stops after half that many epochs
        batch_size: patterns per gradient step
    """
    hidden_units: int = 10
    epochs: int = 100
    learning_rate: float = 0.5
    seed: int = 0
    early_stop_fraction: float = 1.0
    batch_size: int = 16

    def __post_init__(self):
        if self.hidden_units < 1:
            raise InvalidInputError(f"hidden_units must be >= 1, got {self.hidden_units}")
        if self.epochs < 1:
            raise InvalidInputError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise InvalidInputError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 < self.early_stop_fraction <= 1.0:
            raise InvalidInputError(
                f"early_stop_fraction must lie in (0, 1], got {self.early_stop_fraction}"
            )
        if self.batch_size < 1:
            raise InvalidInputError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.seed < 0:
            raise InvalidInputError(f"seed must be >= 0, got {self.seed}")


@dataclass(frozen=True)
class TrainedMLP:
    """
    Network weights plus the training trace.

    Attributes:
        best_epoch: epoch with the lowest validation error
        stopped_epoch: epoch whose weights were kept
        validation_errors: validation misclassification rate after each epoch
    """
    w_hidden: np.ndarray
    b_hidden: np.ndarray
    w_output: np.ndarray
    b_output: np.ndarray
    best_epoch: int
    stopped_epoch: int
    validation_errors: tuple = field(default=(), repr=False)

    @property
    def n_classes(self):
        return self.w_output.shape[1]

    def predict_posteriors(self, features):
        """Output-layer activations, shape (P, L); one row per pattern."""
        features = np.atleast_2d(np.asarray(features, dtype=float))
        hidden = expit(features @ self.w_hidden + self.b_hidden)
        return expit(hidden @ self.w_output + self.b_output)

    def predict(self, features):
        return np.argmax(self.predict_posteriors(features), axis=1)

    def error_rate(self, dataset):
        return float(np.mean(self.predict(dataset.features) != dataset.labels))


def _forward(params, features):
    w1, b1, w2, b2 = params
    hidden = expit(features @ w1 + b1)
    return hidden, expit(hidden @ w2 + b2)


def _evaluate(params, dataset, targets):
    _, outputs = _forward(params, dataset.features)
    errors = float(np.mean(np.argmax(outputs, axis=1) != dataset.labels))
    mse = float(np.mean(np.sum(np.square(outputs - targets), axis=1)))
    return errors, mse


def _one_hot(labels, n_classes):
    targets = np.zeros((labels.shape[0], n_classes))
    targets[np.arange(labels.shape[0]), labels] = 1.0
    return targets


def train_mlp(train, validation, config):
    """
    Train one network and keep the weights chosen by early stopping.

    The best epoch minimizes validation misclassification (lower validation
    squared error, then the earlier epoch, break ties). With
    ``early_stop_fraction < 1`` the weights after
    ``max(1, floor(fraction * best_epoch))`` epochs of the same run are kept.

    Args:
        train (Dataset): training patterns
        validation (Dataset): patterns used to pick the stopping epoch
        config (MLPConfig): architecture and schedule

    Returns:
        TrainedMLP

    Raises:
        InvalidInputError: on an empty training set
        TrainingFailureError: if the training loss becomes non-finite
    """
    if len(train) == 0:
        raise InvalidInputError("cannot train on an empty training set")
    if len(validation) == 0:
        raise InvalidInputError("early stopping needs a non-empty validation set")

    n_classes = train.n_classes
    n_inputs = train.n_features
    rng = np.random.default_rng(config.seed)

    r_in = 1.0 / math.sqrt(n_inputs)
    r_hidden = 1.0 / math.sqrt(config.hidden_units)
    w1 = rng.uniform(-r_in, r_in, (n_inputs, config.hidden_units))
    b1 = np.zeros(config.hidden_units)
    w2 = rng.uniform(-r_hidden, r_hidden, (config.hidden_units, n_classes))
    b2 = np.zeros(n_classes)

    train_targets = _one_hot(train.labels, n_classes)
    val_targets = _one_hot(validation.labels, n_classes)

    snapshots = []
    scores = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train))
        for start in range(0, len(train), config.batch_size):
            batch = order[start:start + config.batch_size]
            x = train.features[batch]
            t = train_targets[batch]

            hidden, outputs = _forward((w1, b1, w2, b2), x)
            delta_out = (outputs - t) * outputs * (1.0 - outputs) / len(batch)
            delta_hidden = (delta_out @ w2.T) * hidden * (1.0 - hidden)

            w2 = w2 - config.learning_rate * (hidden.T @ delta_out)
            b2 = b2 - config.learning_rate * delta_out.sum(axis=0)
            w1 = w1 - config.learning_rate * (x.T @ delta_hidden)
            b1 = b1 - config.learning_rate * delta_hidden.sum(axis=0)

        params = (w1, b1, w2, b2)
        _, train_loss = _evaluate(params, train, train_targets)
        if not math.isfinite(train_loss) or not all(np.all(np.isfinite(p)) for p in params):
            raise TrainingFailureError(
                f"training diverged at epoch {epoch} (loss {train_loss})",
                epoch=epoch, loss=train_loss,
            )
        val_error, val_mse = _evaluate(params, validation, val_targets)
        snapshots.append(params)
        scores.append((val_error, val_mse, epoch))

    best_epoch = min(scores)[2]
    if config.early_stop_fraction < 1.0:
        stopped_epoch = max(1, math.floor(config.early_stop_fraction * best_epoch))
    else:
        stopped_epoch = best_epoch
    logger.debug("seed %d: best validation epoch %d, keeping epoch %d",
                 config.seed, best_epoch, stopped_epoch)

    w1, b1, w2, b2 = snapshots[stopped_epoch - 1]
    return TrainedMLP(
        w_hidden=w1, b_hidden=b1, w_output=w2, b_output=b2,
        best_epoch=best_epoch,
        stopped_epoch=stopped_epoch,
        validation_errors=tuple(score[0] for score in scores),
    )
