"""Mixture-proportion estimation with kernel mean embeddings.

For a candidate lambda the residual embedding (mu_U - lambda mu_L)/(1 - lambda)
is projected onto the convex hull of the unlabeled point embeddings. The
distance stays near zero while lambda is below the known-class proportion
and grows once the residual would need negative known-class mass.
"""
import logging
from dataclasses import replace

import numpy as np

from lac_risk.core import DegenerateKernelError, KernelConfig, ThetaEstimate

logger = logging.getLogger(__name__)

FW_GAP_TOLERANCE = 1e-15
INDISTINGUISHABLE = 1e-12


def _squared_distances(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    sq = (X * X).sum(axis=1)[:, None] + (Y * Y).sum(axis=1)[None, :] - 2.0 * (X @ Y.T)
    np.maximum(sq, 0.0, out=sq)
    if X is Y:
        np.fill_diagonal(sq, 0.0)
    return sq


def median_heuristic(X: np.ndarray) -> float:
    """Median pairwise Euclidean distance between distinct rows of X."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] < 2:
        raise DegenerateKernelError("median heuristic needs at least two points")
    iu = np.triu_indices(X.shape[0], k=1)
    return float(np.median(np.sqrt(_squared_distances(X, X)[iu])))


def resolve_bandwidth(kernel: KernelConfig, pooled: np.ndarray) -> KernelConfig:
    """Fix the bandwidth, applying the median heuristic when none is set."""
    if kernel.bandwidth is not None:
        return kernel
    bandwidth = kernel.bandwidth_scale * median_heuristic(pooled)
    if not bandwidth > 0:
        raise DegenerateKernelError("median pairwise distance is zero; the pooled sample is degenerate")
    return replace(kernel, bandwidth=bandwidth)


def gram(X: np.ndarray, Y: np.ndarray, kernel: KernelConfig) -> np.ndarray:
    """RBF Gram matrix exp(-|x - y|^2 / (2 sigma^2))."""
    if kernel.bandwidth is None:
        raise ValueError("kernel bandwidth must be resolved before building a Gram matrix")
    X = np.asarray(X, dtype=np.float64)
    Y = X if Y is X else np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[1] != Y.shape[1]:
        raise ValueError(f"feature dimensions differ: {X.shape} vs {Y.shape}")
    return np.exp(-_squared_distances(X, Y) / (2.0 * kernel.bandwidth**2))


def _project_to_hull(K: np.ndarray, c: np.ndarray, iters: int) -> tuple[np.ndarray, np.ndarray]:
    """Minimize w'Kw - 2w'c over the simplex by away-step Frank-Wolfe.

    Starts from uniform weights and uses exact line search. Returns w and Kw.
    """
    size = c.size
    w = np.full(size, 1.0 / size)
    Kw = K @ w
    for _ in range(iters):
        grad = Kw - c
        w_grad = float(w @ grad)
        s = int(np.argmin(grad))
        active = np.flatnonzero(w > 0)
        a = int(active[np.argmax(grad[active])])

        fw_gap = w_grad - grad[s]
        away_gap = grad[a] - w_grad
        if fw_gap <= FW_GAP_TOLERANCE:
            break

        wKw = float(w @ Kw)
        toward = fw_gap >= away_gap or w[a] >= 1.0
        if toward:
            curvature = K[s, s] - 2.0 * Kw[s] + wKw
            step_max = 1.0
            gap = fw_gap
        else:
            curvature = wKw - 2.0 * Kw[a] + K[a, a]
            step_max = w[a] / (1.0 - w[a])
            gap = away_gap
        step = step_max if curvature <= 0 else min(gap / curvature, step_max)

        if toward:
            w *= 1.0 - step
            w[s] += step
            Kw = (1.0 - step) * Kw + step * K[s]
        else:
            w *= 1.0 + step
            w[a] -= step
            if step == step_max:
                w[a] = 0.0
            Kw = (1.0 + step) * Kw - step * K[a]
    return w, Kw


def km_distance(
    lam: float,
    gram_uu: np.ndarray,
    gram_ul: np.ndarray,
    gram_ll: np.ndarray,
    frankwolfe_iters: int = 500,
) -> float:
    """Squared RKHS distance from the lambda-residual embedding to the unlabeled hull."""
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"lambda must lie in [0, 1), got {lam}")
    m, n = gram_ul.shape
    if m == 0 or n == 0:
        raise ValueError("km_distance needs non-empty samples")
    if gram_uu.shape != (m, m) or gram_ll.shape != (n, n):
        raise ValueError("Gram matrix shapes are inconsistent")

    a = 1.0 / (m * (1.0 - lam))
    b = -lam / (n * (1.0 - lam))
    c = a * gram_uu.sum(axis=1) + b * gram_ul.sum(axis=1)
    const = a * a * gram_uu.sum() + 2.0 * a * b * gram_ul.sum() + b * b * gram_ll.sum()

    w, Kw = _project_to_hull(gram_uu, c, frankwolfe_iters)
    return max(0.0, float(w @ Kw) - 2.0 * float(w @ c) + float(const))


def _read_kink(lambdas: tuple[float, ...], distances: tuple[float, ...], gap: float, threshold: float) -> float:
    """Proportion at which the distance curve leaves zero.

    Past the true proportion the distance grows by exactly ``gap`` per unit
    of kappa, so the right end of the first segment steeper than
    ``threshold`` pins the kink at kappa - distance / gap. Returns the last
    grid point when no segment is steep.
    """
    kappas = [1.0 / (1.0 - lam) for lam in lambdas]
    for i in range(len(lambdas) - 1):
        slope = (distances[i + 1] - distances[i]) / (kappas[i + 1] - kappas[i]) / gap
        if slope > threshold:
            kink = max(1.0, kappas[i + 1] - distances[i + 1] / gap)
            return 1.0 - 1.0 / kink
    return lambdas[-1]


def theta_curve(
    labeled_features: np.ndarray, unlabeled_features: np.ndarray, kernel: KernelConfig
) -> ThetaEstimate:
    """Distance curve over the lambda grid and the proportion read off it.

    The slope of segment i is the distance increase per unit of
    kappa = 1/(1 - lambda), divided by |mu_U - mu_L|; it lies in [0, 1] for
    an exact projection. See ``_read_kink`` for how the proportion is read.
    """
    X_l = np.asarray(labeled_features, dtype=np.float64)
    X_u = np.asarray(unlabeled_features, dtype=np.float64)
    if X_l.shape[0] == 0 or X_u.shape[0] == 0:
        raise ValueError("labeled and unlabeled samples must be non-empty")
    if X_l.ndim != 2 or X_u.ndim != 2 or X_l.shape[1] != X_u.shape[1]:
        raise ValueError(f"feature dimensions differ: {X_l.shape} vs {X_u.shape}")

    kernel = resolve_bandwidth(kernel, np.vstack([X_u, X_l]))
    assert kernel.bandwidth is not None
    gram_uu = gram(X_u, X_u, kernel)
    gram_ul = gram(X_u, X_l, kernel)
    gram_ll = gram(X_l, X_l, kernel)

    lambdas = kernel.lambda_grid
    distances = tuple(
        float(np.sqrt(km_distance(lam, gram_uu, gram_ul, gram_ll, kernel.frankwolfe_iters)))
        for lam in lambdas
    )
    gap_sq = gram_uu.mean() + gram_ll.mean() - 2.0 * gram_ul.mean()

    if gap_sq <= INDISTINGUISHABLE:
        theta = 1.0
    else:
        theta = _read_kink(lambdas, distances, float(np.sqrt(gap_sq)), kernel.slope_threshold)
    theta = float(min(1.0, max(0.0, theta)))

    logger.debug("Distance curve: %s", ", ".join(f"{l:.2f}:{d:.5f}" for l, d in zip(lambdas, distances)))
    logger.info("Estimated theta=%.3f (bandwidth %.4g)", theta, kernel.bandwidth)
    return ThetaEstimate(theta=theta, bandwidth=kernel.bandwidth, lambdas=tuple(lambdas), distances=distances)


def estimate_theta(
    labeled_features: np.ndarray, unlabeled_features: np.ndarray, kernel: KernelConfig
) -> float:
    """Known-class proportion of the unlabeled sample, in [0, 1]."""
    return theta_curve(labeled_features, unlabeled_features, kernel).theta
