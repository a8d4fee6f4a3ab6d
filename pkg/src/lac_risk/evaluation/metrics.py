"""Prediction rules and test metrics.

Labels are 1-based throughout; k+1 is the augmented class.
"""
from enum import Enum

import numpy as np
from sklearn.metrics import accuracy_score, confusion_matrix, f1_score, roc_auc_score

from lac_risk.core import Dataset, MetricsReport
from lac_risk.losses import softmax
from lac_risk.models import ScoreModel

SOFTMAX_THRESHOLD = 0.95


class PredictionRule(Enum):
    """How a trained model's scores become labels in 1..k+1."""
    ARGMAX = "argmax"  # k+1 outputs, last one is ac
    OVR_THRESHOLD = "ovr-threshold"  # k outputs, ac when every score is negative
    SOFTMAX = "softmax"  # k outputs, never predicts ac
    SOFTMAX_THRESHOLD = "softmax-threshold"  # k outputs, ac when max probability < tau


def predict(scores: np.ndarray) -> np.ndarray:
    """Argmax label (1-based) per score row; ties go to the smallest index.

    A single vector gives a 0-d array.
    """
    scores = np.asarray(scores, dtype=np.float64)
    return np.argmax(scores, axis=-1) + 1


def predict_ovr_threshold(scores: np.ndarray) -> np.ndarray:
    """ac (k+1) where every known-class score is below 0, else the argmax."""
    scores = np.asarray(scores, dtype=np.float64)
    k = scores.shape[-1]
    return np.where(scores.max(axis=-1) < 0, k + 1, np.argmax(scores, axis=-1) + 1)


def predict_softmax_threshold(probs: np.ndarray, tau: float = SOFTMAX_THRESHOLD) -> np.ndarray:
    """ac (k+1) where the top known-class probability is below tau, else the argmax."""
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    probs = np.asarray(probs, dtype=np.float64)
    if not np.allclose(probs.sum(axis=-1), 1.0, atol=1e-9):
        raise ValueError("probabilities must sum to 1")
    k = probs.shape[-1]
    return np.where(probs.max(axis=-1) < tau, k + 1, np.argmax(probs, axis=-1) + 1)


def _check_pair(preds: np.ndarray, truths: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    preds = np.asarray(preds).ravel()
    truths = np.asarray(truths).ravel()
    if preds.size != truths.size:
        raise ValueError(f"{preds.size} predictions for {truths.size} labels")
    if preds.size == 0:
        raise ValueError("no predictions to score")
    return preds, truths


def accuracy(preds: np.ndarray, truths: np.ndarray) -> float:
    preds, truths = _check_pair(preds, truths)
    return float(accuracy_score(truths, preds))


def macro_f1(preds: np.ndarray, truths: np.ndarray, class_count: int) -> float:
    """Unweighted mean of per-class F1 over labels 1..class_count.

    A class with no true and no predicted examples counts as F1 = 0.
    """
    preds, truths = _check_pair(preds, truths)
    labels = np.arange(1, class_count + 1)
    return float(f1_score(truths, preds, labels=labels, average="macro", zero_division=0))


def auc(ac_scores: np.ndarray, is_ac: np.ndarray) -> float:
    """Probability that a random ac example outranks a random known one (ties count half)."""
    ac_scores, is_ac = _check_pair(ac_scores, is_ac)
    flags = np.asarray(is_ac).astype(bool)
    if flags.all() or not flags.any():
        raise ValueError("AUC needs at least one augmented and one known example")
    return float(roc_auc_score(flags, np.asarray(ac_scores, dtype=np.float64)))


def predictions_and_ac_scores(
    model: ScoreModel, rule: PredictionRule, features: np.ndarray, tau: float = SOFTMAX_THRESHOLD
) -> tuple[np.ndarray, np.ndarray]:
    """Labels under the rule and an 'augmented-ness' score for AUC."""
    scores = model.forward(features)
    if rule is PredictionRule.ARGMAX:
        return predict(scores), softmax(scores)[:, -1]
    if rule is PredictionRule.OVR_THRESHOLD:
        return predict_ovr_threshold(scores), -scores.max(axis=1)
    probs = softmax(scores)
    if rule is PredictionRule.SOFTMAX:
        return predict(probs), -probs.max(axis=1)
    return predict_softmax_threshold(probs, tau), -probs.max(axis=1)


def evaluate(
    model: ScoreModel, rule: PredictionRule, test: Dataset, k: int, tau: float = SOFTMAX_THRESHOLD
) -> MetricsReport:
    """Score a trained model on a test split labeled 1..k+1.

    AUC is NaN when the test split holds a single class.
    """
    if test.labels is None or test.n == 0:
        raise ValueError("test split is empty or unlabeled")
    preds, ac_scores = predictions_and_ac_scores(model, rule, test.features, tau)
    truths = test.labels
    is_ac = truths == k + 1
    area = auc(ac_scores, is_ac) if 0 < is_ac.sum() < is_ac.size else float("nan")
    return MetricsReport(
        accuracy=accuracy(preds, truths),
        macro_f1=macro_f1(preds, truths, k + 1),
        auc=area,
        confusion=confusion_matrix(truths, preds, labels=np.arange(1, k + 2)),
        n_test=int(test.n),
    )
