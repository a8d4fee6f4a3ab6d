"""Exact expected risk on finite-support distributions, and resampling from them."""
import numpy as np

from lac_risk.core import DiscreteDistributionSpec, LossSpec
from lac_risk.losses import loss_values_and_grads
from .estimators import lac_risk


def exact_risk_oracle(
    dist: DiscreteDistributionSpec,
    kc_scores: np.ndarray,
    ac_scores: np.ndarray,
    spec: LossSpec,
) -> float:
    """theta * E_kc[L(f, y)] + (1 - theta) * E_ac[L(f, ac)] by enumeration.

    Score rows are per support point; the last output is ac.
    """
    kc_scores = np.asarray(kc_scores, dtype=np.float64)
    ac_scores = np.asarray(ac_scores, dtype=np.float64)
    if kc_scores.shape[0] != len(dist.kc_probs) or ac_scores.shape[0] != len(dist.ac_probs):
        raise ValueError("a score row is required for every support point")
    n_outputs = kc_scores.shape[1]
    kc_losses, _ = loss_values_and_grads(spec, kc_scores, np.array(dist.kc_labels))
    ac_losses, _ = loss_values_and_grads(spec, ac_scores, np.full(ac_scores.shape[0], n_outputs))
    return dist.theta * float(np.dot(dist.kc_probs, kc_losses)) + (1.0 - dist.theta) * float(
        np.dot(dist.ac_probs, ac_losses)
    )


def support_losses(
    dist: DiscreteDistributionSpec,
    kc_scores: np.ndarray,
    ac_scores: np.ndarray,
    spec: LossSpec,
) -> tuple[np.ndarray, np.ndarray]:
    """(L(y), L(ac)) pairs on known support points and L(ac) on augmented ones."""
    n_outputs = np.asarray(kc_scores).shape[1]
    kc_true, _ = loss_values_and_grads(spec, kc_scores, np.array(dist.kc_labels))
    kc_ac, _ = loss_values_and_grads(spec, kc_scores, np.full(len(dist.kc_probs), n_outputs))
    ac_ac, _ = loss_values_and_grads(spec, ac_scores, np.full(len(dist.ac_probs), n_outputs))
    return np.column_stack([kc_true, kc_ac]), ac_ac


def resample_lac_risks(
    dist: DiscreteDistributionSpec,
    kc_losses: np.ndarray,
    ac_losses: np.ndarray,
    n: int,
    m: int,
    repeats: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """lac_risk (with the true theta) on independently drawn datasets.

    Labeled points come from the known-class distribution; unlabeled points
    are known-class with probability theta and augmented otherwise.
    """
    risks = np.empty(repeats)
    kc_probs = np.asarray(dist.kc_probs)
    ac_probs = np.asarray(dist.ac_probs)
    for r in range(repeats):
        labeled = kc_losses[rng.choice(kc_probs.size, size=n, p=kc_probs)]
        from_kc = rng.random(m) < dist.theta
        unlabeled = np.where(
            from_kc,
            kc_losses[rng.choice(kc_probs.size, size=m, p=kc_probs), 1],
            ac_losses[rng.choice(ac_probs.size, size=m, p=ac_probs)],
        )
        risks[r] = lac_risk(labeled, unlabeled, dist.theta)
    return risks
