"""Tests for prediction rules and metrics."""
import math

import numpy as np
import pytest

from lac_risk.core import Dataset
from lac_risk.evaluation import (
    PredictionRule,
    accuracy,
    auc,
    evaluate,
    macro_f1,
    predict,
    predict_ovr_threshold,
    predict_softmax_threshold,
)
from lac_risk.models import LinearModel


def test_predict_examples():
    """Argmax with ties going to the smallest label."""
    assert predict(np.array([0.1, 0.9, 0.3])) == 2
    assert predict(np.array([0.5, 0.5])) == 1
    assert predict(np.array([0.0, 0.2, 1.0])) == 3
    np.testing.assert_array_equal(predict(np.array([[1.0, 0.0], [0.0, 1.0]])), [1, 2])


def test_predict_is_shift_invariant():
    """Adding a constant to every score does not change the label."""
    scores = np.random.default_rng(0).normal(size=(20, 4))
    np.testing.assert_array_equal(predict(scores), predict(scores + 3.7))


def test_predict_ovr_threshold_examples():
    """ac only when every known score is strictly negative."""
    assert predict_ovr_threshold(np.array([-0.2, -0.1])) == 3
    assert predict_ovr_threshold(np.array([0.3, -0.1])) == 1
    assert predict_ovr_threshold(np.array([0.0, -1.0])) == 1


def test_predict_softmax_threshold_examples():
    """ac below tau; tau must lie in (0, 1]."""
    assert predict_softmax_threshold(np.array([0.93, 0.07]), 0.95) == 3
    assert predict_softmax_threshold(np.array([0.01, 0.99]), 0.95) == 2
    with pytest.raises(ValueError):
        predict_softmax_threshold(np.array([0.5, 0.5]), 1.01)


def test_accuracy_examples():
    """Exact-match fraction."""
    assert accuracy(np.array([1, 2, 3]), np.array([1, 2, 3])) == 1.0
    assert accuracy(np.array([1, 1]), np.array([2, 2])) == 0.0
    assert accuracy(np.array([1, 2, 3, 3]), np.array([1, 2, 3, 1])) == 0.75
    with pytest.raises(ValueError):
        accuracy(np.array([1]), np.array([1, 2]))


def test_macro_f1_examples():
    """Perfect, half-right, and absent-class cases."""
    assert macro_f1(np.array([1, 2, 2]), np.array([1, 2, 2]), 2) == 1.0
    assert macro_f1(np.array([1, 1, 2, 2]), np.array([1, 2, 1, 2]), 2) == pytest.approx(0.5)
    # class 3 never appears: it contributes 0 to the mean
    assert macro_f1(np.array([1, 2]), np.array([1, 2]), 3) == pytest.approx(2 / 3)


def test_auc_examples():
    """Perfect separation, 3 of 4 ordered pairs, and all ties."""
    flags = np.array([1, 1, 0, 0])
    assert auc(np.array([0.9, 0.8, 0.1, 0.2]), flags) == 1.0
    assert auc(np.array([0.9, 0.3, 0.8, 0.2]), flags) == pytest.approx(0.75)
    assert auc(np.full(4, 0.4), flags) == pytest.approx(0.5)


def test_auc_is_rank_invariant():
    """A strictly increasing transform leaves AUC unchanged."""
    rng = np.random.default_rng(1)
    scores = rng.normal(size=50)
    flags = rng.random(50) < 0.4
    assert auc(np.exp(scores), flags) == pytest.approx(auc(scores, flags))


def test_auc_needs_both_classes():
    """Single-class input is an error."""
    with pytest.raises(ValueError):
        auc(np.array([0.1, 0.2]), np.array([1, 1]))


def test_auc_null_distribution():
    """Random scores give AUC in [0.4, 0.6] in at least 95 of 100 trials."""
    rng = np.random.default_rng(2)
    flags = np.repeat([True, False], 100)
    inside = sum(0.4 <= auc(rng.random(200), flags) <= 0.6 for _ in range(100))
    assert inside >= 95


def _one_hot_test(k):
    labels = np.tile(np.arange(1, k + 2), 5)
    return Dataset(features=np.eye(k + 1)[labels - 1], labels=labels, class_count=k + 1)


def test_evaluate_oracle_model():
    """A model scoring the true label highest is perfect on every metric."""
    k = 3
    test = _one_hot_test(k)
    model = LinearModel({"W": 10.0 * np.eye(k + 1), "b": np.zeros(k + 1)})

    report = evaluate(model, PredictionRule.ARGMAX, test, k)

    assert report.accuracy == 1.0
    assert report.macro_f1 == 1.0
    assert report.auc == 1.0
    np.testing.assert_array_equal(report.confusion, 5 * np.eye(k + 1))
    assert report.n_test == 20


def test_evaluate_constant_model():
    """Constant scores predict label 1 everywhere; AUC is 0.5."""
    k = 2
    test = _one_hot_test(k)
    model = LinearModel({"W": np.zeros((k + 1, k + 1)), "b": np.zeros(k + 1)})

    report = evaluate(model, PredictionRule.ARGMAX, test, k)

    assert report.accuracy == pytest.approx(1 / 3)
    assert report.auc == pytest.approx(0.5)
    np.testing.assert_array_equal(report.confusion.sum(axis=1), [5, 5, 5])


def test_evaluate_threshold_rules():
    """k-output baselines map low-confidence rows to the augmented class."""
    k = 2
    features = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
    test = Dataset(features=features, labels=np.array([1, 2, 3]), class_count=3)
    model = LinearModel({"W": 10.0 * np.eye(2), "b": np.zeros(2)})

    ovr = evaluate(model, PredictionRule.OVR_THRESHOLD, test, k)
    soft_t = evaluate(model, PredictionRule.SOFTMAX_THRESHOLD, test, k)
    soft = evaluate(model, PredictionRule.SOFTMAX, test, k)

    assert ovr.accuracy == 1.0
    assert soft_t.accuracy == 1.0
    assert soft.accuracy == pytest.approx(2 / 3)


def test_evaluate_single_class_test_has_nan_auc():
    """AUC is undefined without augmented examples."""
    test = Dataset(features=np.eye(2), labels=np.array([1, 2]), class_count=3)
    model = LinearModel({"W": np.eye(3, 2), "b": np.zeros(3)})

    report = evaluate(model, PredictionRule.ARGMAX, test, 2)

    assert math.isnan(report.auc)
    assert report.to_dict()["n_test"] == 2
