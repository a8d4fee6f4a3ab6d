"""Empirical risk estimators for learning with augmented classes.

Estimators consume precomputed per-example losses, never features or models.
``labeled_losses`` is an (n, 2) array of (L(f(x), y), L(f(x), ac)) pairs and
``unlabeled_ac_losses`` an (m,) array of L(f(x), ac).

Every objective is written as ``true_term + h(pac)`` where ``true_term`` is
the weighted labeled loss on the true labels and ``pac`` the estimated risk
of predicting ac on the known-class part of the mixture. The variants only
differ in ``h``, which keeps their values and gradient weights consistent.
"""
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from lac_risk.core import LossKind, LossSpec, PriorShiftConfig, RiskConfig, RiskVariant
from lac_risk.losses import psi

VARIANT_NAMES = {variant.value: variant for variant in RiskVariant}


@dataclass(frozen=True)
class ObjectiveResult:
    """Objective value plus d(value)/d(loss term) for every loss term."""
    value: float
    pac: float
    penalty: float
    labeled_true_weights: np.ndarray  # (n,) weights on L(f(x_i), y_i)
    labeled_ac_weights: np.ndarray  # (n,) weights on L(f(x_i), ac)
    unlabeled_ac_weights: np.ndarray  # (m,) weights on L(f(x_j), ac)


def parse_risk_config(text: str, theta_hat: float) -> RiskConfig:
    """Parse "ure", "nrpr:t=2,lambda=1.0", "relu", "abs", "eulac" or "shift[:...]"."""
    match = re.fullmatch(r"\s*([a-z]+)\s*(?::(.*))?", text.lower())
    if not match or match.group(1) not in VARIANT_NAMES:
        raise ValueError(f"unrecognised risk {text!r}; expected one of {sorted(VARIANT_NAMES)}")
    variant = VARIANT_NAMES[match.group(1)]
    params = {"t": 1.0, "lambda": 1.0}
    if match.group(2):
        if variant not in (RiskVariant.URE_PENALTY, RiskVariant.PRIOR_SHIFT):
            raise ValueError(f"risk {variant.value} takes no parameters")
        for item in match.group(2).split(","):
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or key not in params:
                raise ValueError(f"invalid risk parameter {item.strip()!r}; expected t=.. or lambda=..")
            try:
                params[key] = float(value)
            except ValueError:
                raise ValueError(f"invalid value for {key}: {value.strip()!r}") from None
    return RiskConfig(theta_hat=theta_hat, lam=params["lambda"], t=params["t"], variant=variant)


def _check_batches(labeled_losses: np.ndarray, unlabeled_ac_losses: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    labeled = np.asarray(labeled_losses, dtype=np.float64)
    unlabeled = np.asarray(unlabeled_ac_losses, dtype=np.float64)
    if labeled.ndim != 2 or labeled.shape[1] != 2:
        raise ValueError(f"labeled losses must be (n, 2) pairs, got shape {labeled.shape}")
    if labeled.shape[0] == 0:
        raise ValueError("labeled batch is empty")
    if unlabeled.ndim != 1 or unlabeled.size == 0:
        raise ValueError("unlabeled batch is empty")
    return labeled, unlabeled


def _check_theta(theta_hat: float) -> None:
    if not 0.0 <= theta_hat <= 1.0:
        raise ValueError(f"theta_hat must lie in [0, 1], got {theta_hat}")


def _decompose(
    coefficients: np.ndarray, labeled: np.ndarray, unlabeled: np.ndarray
) -> tuple[float, float]:
    true_term = float(np.dot(coefficients, labeled[:, 0]))
    pac = float(np.mean(unlabeled)) - float(np.dot(coefficients, labeled[:, 1]))
    return true_term, pac


def lac_risk(labeled_losses: np.ndarray, unlabeled_ac_losses: np.ndarray, theta_hat: float) -> float:
    """Unbiased LAC risk estimate; may be negative."""
    _check_theta(theta_hat)
    labeled, unlabeled = _check_batches(labeled_losses, unlabeled_ac_losses)
    coefficients = np.full(labeled.shape[0], theta_hat / labeled.shape[0])
    true_term, pac = _decompose(coefficients, labeled, unlabeled)
    return true_term + pac


def pac_risk(labeled_ac_losses: np.ndarray, unlabeled_ac_losses: np.ndarray, theta_hat: float) -> float:
    """Mean unlabeled ac-loss minus theta_hat times mean labeled ac-loss."""
    _check_theta(theta_hat)
    labeled_ac = np.asarray(labeled_ac_losses, dtype=np.float64)
    pairs = np.column_stack([np.zeros_like(labeled_ac), labeled_ac]) if labeled_ac.ndim == 1 else labeled_ac
    labeled, unlabeled = _check_batches(pairs, unlabeled_ac_losses)
    coefficients = np.full(labeled.shape[0], theta_hat / labeled.shape[0])
    return _decompose(coefficients, labeled, unlabeled)[1]


def penalty(pac_value: float, t: float) -> float:
    """(-pac)^t for negative pac, else 0."""
    if pac_value < 0:
        return float((-pac_value) ** t)
    return 0.0


def penalty_slope(pac_value: float, t: float) -> float:
    """Derivative of penalty w.r.t. pac; 0 at pac = 0."""
    if pac_value < 0 and t > 0:
        return float(-t * (-pac_value) ** (t - 1.0))
    return 0.0


def _shift_coefficients(labeled_labels: np.ndarray, prior_shift: PriorShiftConfig) -> np.ndarray:
    labels = np.asarray(labeled_labels, dtype=np.int64)
    k = len(prior_shift.theta_te)
    if labels.size and (labels.min() < 1 or labels.max() > k):
        raise ValueError(f"labeled labels must lie in 1..{k}")
    counts = np.bincount(labels, minlength=k + 1)[1:]
    coefficients = np.zeros(labels.size)
    for i, prior in enumerate(prior_shift.theta_te, start=1):
        if prior > 0 and counts[i - 1] == 0:
            raise ValueError(f"class {i} has prior {prior} but no labeled examples")
        if counts[i - 1]:
            coefficients[labels == i] = prior / counts[i - 1]
    return coefficients


def prior_shift_risk(
    labeled_losses: np.ndarray,
    labeled_labels: np.ndarray,
    prior_shift: PriorShiftConfig,
    unlabeled_ac_losses: np.ndarray,
) -> float:
    """Risk under per-class test priors: within-class means weighted by theta_te."""
    labeled, unlabeled = _check_batches(labeled_losses, unlabeled_ac_losses)
    coefficients = _shift_coefficients(labeled_labels, prior_shift)
    true_term, pac = _decompose(coefficients, labeled, unlabeled)
    return true_term + pac


def objective(
    labeled_losses: np.ndarray,
    unlabeled_ac_losses: np.ndarray,
    config: RiskConfig,
    labeled_labels: Optional[np.ndarray] = None,
    prior_shift: Optional[PriorShiftConfig] = None,
) -> ObjectiveResult:
    """Training objective of the configured variant with its gradient weights.

    PRIOR_SHIFT needs labeled_labels and prior_shift; it is penalized like
    URE_PENALTY. SUPERVISED is the mean labeled loss and ignores the
    unlabeled batch.
    """
    labeled, unlabeled = _check_batches(labeled_losses, unlabeled_ac_losses)
    n, m = labeled.shape[0], unlabeled.shape[0]
    variant = config.variant

    if variant is RiskVariant.SUPERVISED:
        return ObjectiveResult(
            value=float(np.mean(labeled[:, 0])),
            pac=0.0,
            penalty=0.0,
            labeled_true_weights=np.full(n, 1.0 / n),
            labeled_ac_weights=np.zeros(n),
            unlabeled_ac_weights=np.zeros(m),
        )

    if variant is RiskVariant.PRIOR_SHIFT:
        if labeled_labels is None or prior_shift is None:
            raise ValueError("prior-shift objective needs labeled labels and theta_te")
        coefficients = _shift_coefficients(labeled_labels, prior_shift)
    else:
        coefficients = np.full(n, config.theta_hat / n)

    true_term, pac = _decompose(coefficients, labeled, unlabeled)
    omega = 0.0
    if variant in (RiskVariant.URE, RiskVariant.EULAC_OVR):
        tail, slope = pac, 1.0
    elif variant in (RiskVariant.URE_PENALTY, RiskVariant.PRIOR_SHIFT):
        omega = penalty(pac, config.t)
        tail = pac + config.lam * omega
        slope = 1.0 + config.lam * penalty_slope(pac, config.t)
    elif variant is RiskVariant.RELU_CORRECTED:
        tail, slope = max(0.0, pac), (1.0 if pac >= 0 else 0.0)
    elif variant is RiskVariant.ABS_CORRECTED:
        tail, slope = abs(pac), (1.0 if pac >= 0 else -1.0)
    else:
        raise ValueError(f"unsupported risk variant {variant}")

    return ObjectiveResult(
        value=true_term + tail,
        pac=pac,
        penalty=omega,
        labeled_true_weights=coefficients.copy(),
        labeled_ac_weights=-slope * coefficients,
        unlabeled_ac_weights=np.full(m, slope / m),
    )


def eulac_ovr_risk(
    labeled_scores: np.ndarray,
    labeled_labels: np.ndarray,
    unlabeled_scores: np.ndarray,
    theta_hat: float,
    spec: LossSpec,
) -> float:
    """LAC risk with the OVR loss written in its one-vs-rest form.

    Scores have k+1 columns, the last one for ac; labels lie in 1..k.
    """
    if spec.kind is not LossKind.OVR:
        raise ValueError(f"eulac_ovr_risk needs the OVR loss, got {spec.kind.value}")
    _check_theta(theta_hat)
    labeled = np.asarray(labeled_scores, dtype=np.float64)
    unlabeled = np.asarray(unlabeled_scores, dtype=np.float64)
    if labeled.ndim != 2 or unlabeled.ndim != 2 or labeled.shape[0] == 0 or unlabeled.shape[0] == 0:
        raise ValueError("score batches must be non-empty matrices")
    labels = np.asarray(labeled_labels, dtype=np.int64)
    k = labeled.shape[1] - 1
    if labels.shape != (labeled.shape[0],) or labels.min() < 1 or labels.max() > k:
        raise ValueError(f"labeled labels must lie in 1..{k}")

    f_y = labeled[np.arange(labels.size), labels - 1]
    f_ac = labeled[:, k]
    bracket = psi(f_y) - psi(-f_y) + psi(-f_ac) - psi(f_ac)
    unlabeled_term = psi(unlabeled[:, k]) + psi(-unlabeled[:, :k]).sum(axis=1)
    return theta_hat * float(np.mean(bracket)) + float(np.mean(unlabeled_term))
