"""Multi-class losses with analytic gradients w.r.t. the score vector.

All batch functions take a (B, C) score matrix and 1-based labels in 1..C.
Values and gradients are computed in one pass.
"""
import math
import re
from typing import NamedTuple

import numpy as np

from lac_risk.core import LossKind, LossSpec


def parse_loss_spec(text: str) -> LossSpec:
    """Parse "gce", "gce:q=0.7", "ce" or "ovr"."""
    match = re.fullmatch(r"\s*(gce|ce|ovr)\s*(?::\s*q\s*=\s*([^\s,]+)\s*)?", text.lower())
    if not match:
        raise ValueError(f"unrecognised loss {text!r}; expected gce[:q=..], ce or ovr")
    kind = LossKind(match.group(1))
    if match.group(2) is None:
        return LossSpec(kind)
    if kind is not LossKind.GCE:
        raise ValueError(f"loss {kind.value} takes no parameters")
    try:
        q = float(match.group(2))
    except ValueError:
        raise ValueError(f"invalid q in {text!r}") from None
    return LossSpec(kind, q=q)


def _check_scores(scores: np.ndarray) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    return scores


def log_softmax(scores: np.ndarray) -> np.ndarray:
    """Row-wise log-softmax with max subtraction."""
    scores = _check_scores(scores)
    shifted = scores - scores.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax(scores: np.ndarray) -> np.ndarray:
    """Row-wise softmax; accepts a vector or a matrix of score rows."""
    scores = _check_scores(scores)
    shifted = np.exp(scores - scores.max(axis=-1, keepdims=True))
    return shifted / shifted.sum(axis=-1, keepdims=True)


def psi(z: np.ndarray) -> np.ndarray:
    """Logistic binary loss ln(1 + exp(-z))."""
    return np.logaddexp(0.0, -np.asarray(z, dtype=np.float64))


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


def _check_labels(labels: np.ndarray, n_rows: int, n_outputs: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (n_rows,):
        raise ValueError(f"expected {n_rows} labels, got shape {labels.shape}")
    if labels.size and (labels.min() < 1 or labels.max() > n_outputs):
        raise ValueError(f"labels must lie in 1..{n_outputs}")
    return labels.astype(np.int64) - 1


def loss_values_and_grads(
    spec: LossSpec, scores: np.ndarray, labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-row loss values (B,) and gradients (B, C) for labels in 1..C."""
    scores = _check_scores(scores)
    if scores.ndim != 2:
        raise ValueError(f"scores must be a (batch, outputs) matrix, got shape {scores.shape}")
    n_rows, n_outputs = scores.shape
    idx = _check_labels(labels, n_rows, n_outputs)
    rows = np.arange(n_rows)

    if spec.kind is LossKind.OVR:
        signs = -np.ones_like(scores)
        signs[rows, idx] = 1.0
        # psi(s * f) per output; d/df psi(s f) = -s * sigmoid(-s f)
        values = psi(signs * scores).sum(axis=1)
        grads = -signs * sigmoid(-signs * scores)
        return values, grads

    log_p = log_softmax(scores)
    p = np.exp(log_p)
    onehot = np.zeros_like(scores)
    onehot[rows, idx] = 1.0
    log_p_y = log_p[rows, idx]

    if spec.kind is LossKind.CE:
        return -log_p_y, p - onehot

    q = spec.q
    # (1 - p_y^q) / q, written with expm1 to keep precision for small q
    values = -np.expm1(q * log_p_y) / q
    p_y_q = np.exp(q * log_p_y)
    grads = -p_y_q[:, None] * (onehot - p)
    return values, grads


def loss_value(spec: LossSpec, scores: np.ndarray, y: int) -> float:
    """Loss of one score vector against label y in 1..len(scores)."""
    values, _ = loss_values_and_grads(spec, np.atleast_2d(scores), np.array([y]))
    return float(values[0])


def loss_grad(spec: LossSpec, scores: np.ndarray, y: int) -> np.ndarray:
    """Gradient of loss_value w.r.t. the score vector."""
    _, grads = loss_values_and_grads(spec, np.atleast_2d(scores), np.array([y]))
    return grads[0]


class GceLimit(NamedTuple):
    gce: float
    ce: float
    gap: float


def gce_limit_check(p_y: float, q: float = 1e-6) -> GceLimit:
    """Compare GCE at a tiny q with cross-entropy at the same p_y."""
    if not 0.0 < p_y <= 1.0:
        raise ValueError(f"p_y must lie in (0, 1], got {p_y}")
    log_p = math.log(p_y)
    gce = -math.expm1(q * log_p) / q
    ce = -log_p
    return GceLimit(gce=gce, ce=ce, gap=abs(gce - ce))
