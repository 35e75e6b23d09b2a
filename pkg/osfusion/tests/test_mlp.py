import math

import numpy as np
import pytest

from osfusion.datasets import SplitSpec, make_blobs, split
from osfusion.exceptions import InvalidInputError, TrainingFailureError
from osfusion.mlp import MLPConfig, train_mlp


@pytest.fixture(scope='module')
def blobs():
    return split(make_blobs(200, separation=8.0, seed=3), SplitSpec(seed=4))


def test_config_validation():
    with pytest.raises(InvalidInputError):
        MLPConfig(early_stop_fraction=0.0)
    with pytest.raises(InvalidInputError):
        MLPConfig(hidden_units=0)
    with pytest.raises(InvalidInputError):
        MLPConfig(learning_rate=-0.1)


def test_separable_blobs_are_learned(blobs):
    train, validation, test = blobs
    model = train_mlp(train, validation, MLPConfig(hidden_units=5, epochs=100, seed=1))
    assert model.error_rate(test) == 0.0
    posteriors = model.predict_posteriors(test.features)
    assert posteriors.shape == (len(test), 2)
    assert np.all(np.isfinite(posteriors))


def test_half_trained_network_is_no_better_on_validation(blobs):
    train, validation, _ = blobs
    tuned = train_mlp(train, validation, MLPConfig(hidden_units=5, epochs=100, seed=1))
    half = train_mlp(train, validation, MLPConfig(hidden_units=5, epochs=100, seed=1, early_stop_fraction=0.5))
    assert half.best_epoch == tuned.best_epoch
    assert half.stopped_epoch == max(1, tuned.best_epoch // 2)
    assert half.error_rate(validation) >= tuned.error_rate(validation)


def test_training_is_deterministic(blobs):
    train, validation, _ = blobs
    config = MLPConfig(hidden_units=4, epochs=10, seed=7)
    first = train_mlp(train, validation, config)
    second = train_mlp(train, validation, config)
    assert np.array_equal(first.w_hidden, second.w_hidden)
    assert np.array_equal(first.w_output, second.w_output)


def test_divergence_is_reported(blobs):
    train, validation, _ = blobs
    with np.errstate(all='ignore'):
        with pytest.raises(TrainingFailureError) as excinfo:
            train_mlp(train, validation, MLPConfig(hidden_units=4, epochs=5, learning_rate=math.inf))
    assert excinfo.value.epoch == 1
