"""Training loop over any risk variant."""
import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from lac_risk.core import (
    EpochRecord,
    LacScenario,
    LossSpec,
    PriorShiftConfig,
    RiskConfig,
    RiskVariant,
    TrainConfig,
    TrainingDivergedError,
)
from lac_risk.losses import loss_values_and_grads
from lac_risk.risk import ObjectiveResult, objective
from .networks import Params, ScoreModel, build_model
from .optim import AdamState, adam_step

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingBatch:
    labeled_features: np.ndarray
    labeled_labels: np.ndarray  # 1..k
    unlabeled_features: np.ndarray


@dataclass
class TrainResult:
    model: ScoreModel
    history: list[EpochRecord]


def output_count(k: int, variant: RiskVariant) -> int:
    """k scores for the supervised baselines, k+1 (last = ac) otherwise."""
    return k if variant is RiskVariant.SUPERVISED else k + 1


def _check_finite(scores: np.ndarray) -> None:
    if not np.all(np.isfinite(scores)):
        raise FloatingPointError("model produced non-finite scores")


def objective_and_gradients(
    model: ScoreModel,
    batch: TrainingBatch,
    risk: RiskConfig,
    loss: LossSpec,
    prior_shift: Optional[PriorShiftConfig] = None,
) -> tuple[ObjectiveResult, Params]:
    """Objective on one batch and its gradient w.r.t. every model parameter.

    Labeled and unlabeled rows go through a single forward/backward pass.
    Raises FloatingPointError when the model produces non-finite scores.
    """
    X_l = batch.labeled_features
    y = batch.labeled_labels
    n = X_l.shape[0]

    if risk.variant is RiskVariant.SUPERVISED:
        scores = model.forward(X_l)
        _check_finite(scores)
        values, grads = loss_values_and_grads(loss, scores, y)
        result = objective(np.column_stack([values, np.zeros(n)]), np.zeros(1), risk)
        G = result.labeled_true_weights[:, None] * grads
        return result, model.backward(X_l, G)

    X = np.vstack([X_l, batch.unlabeled_features])
    scores = model.forward(X)
    _check_finite(scores)
    ac = model.n_outputs
    labeled_scores, unlabeled_scores = scores[:n], scores[n:]
    m = unlabeled_scores.shape[0]

    true_values, true_grads = loss_values_and_grads(loss, labeled_scores, y)
    lac_values, lac_grads = loss_values_and_grads(loss, labeled_scores, np.full(n, ac))
    u_values, u_grads = loss_values_and_grads(loss, unlabeled_scores, np.full(m, ac))

    result = objective(
        np.column_stack([true_values, lac_values]), u_values, risk, labeled_labels=y, prior_shift=prior_shift
    )
    G = np.vstack([
        result.labeled_true_weights[:, None] * true_grads + result.labeled_ac_weights[:, None] * lac_grads,
        result.unlabeled_ac_weights[:, None] * u_grads,
    ])
    return result, model.backward(X, G)


def _batch_prior_shift(prior_shift: PriorShiftConfig, labels: np.ndarray) -> PriorShiftConfig:
    present = set(np.unique(labels).tolist())
    return PriorShiftConfig(
        tuple(p if (i + 1) in present else 0.0 for i, p in enumerate(prior_shift.theta_te))
    )


def train(
    scenario: LacScenario,
    config: TrainConfig,
    prior_shift: Optional[PriorShiftConfig] = None,
) -> TrainResult:
    """Train a fresh model on the scenario's labeled and unlabeled splits.

    Each epoch shuffles both splits and cuts them into the same number of
    steps, so labeled and unlabeled mini-batches keep the n:m ratio. Without
    batch_size every step is full batch.
    """
    X_l = scenario.labeled.features
    y_l = scenario.labeled.labels
    X_u = scenario.unlabeled.features
    if y_l is None or X_l.shape[0] == 0:
        raise ValueError("labeled split is empty")
    if X_u.shape[0] == 0 and config.risk.variant is not RiskVariant.SUPERVISED:
        raise ValueError("unlabeled split is empty")
    if config.risk.variant is RiskVariant.PRIOR_SHIFT and prior_shift is None:
        raise ValueError("prior-shift training needs per-class priors")

    rng = np.random.default_rng(config.seed)
    model = build_model(
        config.model, X_l.shape[1], output_count(scenario.k, config.risk.variant), config.hidden, rng
    )
    state = AdamState.zeros_like(model.params)

    n, m = X_l.shape[0], X_u.shape[0]
    full_batch = config.batch_size is None or config.batch_size >= n
    steps = 1 if full_batch else math.ceil(n / config.batch_size)  # type: ignore[operator]
    log_every = max(1, config.epochs // 10)
    history: list[EpochRecord] = []

    for epoch in range(1, config.epochs + 1):
        if full_batch:
            labeled_chunks = [np.arange(n)]
            unlabeled_chunks = [np.arange(m)]
        else:
            labeled_chunks = np.array_split(rng.permutation(n), steps)
            unlabeled_chunks = np.array_split(rng.permutation(m), steps)

        totals = np.zeros(3)
        for step in range(steps):
            idx_l = labeled_chunks[step]
            idx_u = unlabeled_chunks[step] if unlabeled_chunks[step].size else unlabeled_chunks[0]
            batch = TrainingBatch(X_l[idx_l], y_l[idx_l], X_u[idx_u])
            shift = prior_shift
            if shift is not None and not full_batch:
                shift = _batch_prior_shift(shift, batch.labeled_labels)

            try:
                result, grads = objective_and_gradients(model, batch, config.risk, config.loss, shift)
            except FloatingPointError:
                raise TrainingDivergedError(epoch, step + 1, math.nan) from None
            if not math.isfinite(result.value):
                raise TrainingDivergedError(epoch, step + 1, result.value)
            model.params, state = adam_step(
                model.params, grads, state, config.learning_rate, config.weight_decay
            )
            totals += (result.value, result.pac, result.penalty)

        means = totals / steps
        history.append(EpochRecord(epoch, float(means[0]), float(means[1]), float(means[2])))
        if epoch % log_every == 0:
            logger.debug(
                "epoch %d/%d objective=%.6f pac=%.6f penalty=%.6f",
                epoch, config.epochs, means[0], means[1], means[2],
            )

    logger.info(
        "Trained %s model (%s, %s) for %d epochs, final objective %.6f",
        config.model, config.risk, config.loss, config.epochs, history[-1].objective,
    )
    return TrainResult(model=model, history=history)


def write_history_csv(history: list[EpochRecord], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["epoch", "objective", "pac_risk", "penalty"])
        for record in history:
            writer.writerow([record.epoch, repr(record.objective), repr(record.pac_risk), repr(record.penalty)])
    return path
