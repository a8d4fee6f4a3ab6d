"""Prediction rules and metrics."""
from .metrics import (
    SOFTMAX_THRESHOLD,
    PredictionRule,
    accuracy,
    auc,
    evaluate,
    macro_f1,
    predict,
    predict_ovr_threshold,
    predict_softmax_threshold,
    predictions_and_ac_scores,
)

__all__ = [
    "SOFTMAX_THRESHOLD",
    "PredictionRule",
    "accuracy",
    "auc",
    "evaluate",
    "macro_f1",
    "predict",
    "predict_ovr_threshold",
    "predict_softmax_threshold",
    "predictions_and_ac_scores",
]
