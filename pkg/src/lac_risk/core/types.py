"""Core data types for learning with augmented classes."""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np

from .errors import ScenarioError


def _frozen_array(values: Any, dtype: Any) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with optional class labels in 1..class_count.

    Arrays are copied and made read-only on construction.
    """
    features: np.ndarray
    labels: Optional[np.ndarray]
    class_count: int
    label_names: Optional[tuple[str, ...]] = None  # original label text, index i -> label i+1

    def __post_init__(self) -> None:
        features = _frozen_array(self.features, np.float64)
        if features.ndim != 2:
            raise ValueError(f"features must be a 2-D matrix, got shape {features.shape}")
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain non-finite entries")
        object.__setattr__(self, "features", features)

        if self.labels is not None:
            labels = _frozen_array(self.labels, np.int64)
            if labels.shape != (features.shape[0],):
                raise ValueError(
                    f"{labels.shape[0] if labels.ndim else 0} labels for {features.shape[0]} rows"
                )
            if labels.size and (labels.min() < 1 or labels.max() > self.class_count):
                raise ValueError(f"labels must lie in 1..{self.class_count}")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])

    def is_labeled(self) -> bool:
        return self.labels is not None


@dataclass(frozen=True)
class SyntheticSpec:
    """Isotropic Gaussian classes sharing one standard deviation."""
    means: tuple[tuple[float, ...], ...]
    std: float = 1.0
    theta: Optional[float] = None  # known-class mass of the unlabeled/test mixture

    def __post_init__(self) -> None:
        if len(self.means) < 2:
            raise ScenarioError("synthetic data needs at least two classes")
        dims = {len(mean) for mean in self.means}
        if len(dims) != 1:
            raise ScenarioError(f"class means have mismatched dimensions: {sorted(dims)}")
        if not self.std > 0:
            raise ScenarioError(f"standard deviation must be positive, got {self.std}")
        if self.theta is not None and not 0.0 < self.theta < 1.0:
            raise ScenarioError(f"synthetic theta must lie in (0, 1), got {self.theta}")

    @classmethod
    def circle(
        cls, classes: int, radius: float = 6.0, std: float = 1.0, theta: Optional[float] = None
    ) -> "SyntheticSpec":
        """Class means evenly spaced on a 2-D circle."""
        means = tuple(
            (
                radius * math.cos(2.0 * math.pi * c / classes),
                radius * math.sin(2.0 * math.pi * c / classes),
            )
            for c in range(classes)
        )
        return cls(means=means, std=std, theta=theta)

    @property
    def class_count(self) -> int:
        return len(self.means)

    @property
    def dimension(self) -> int:
        return len(self.means[0])


@dataclass(frozen=True)
class ScenarioConfig:
    """How to carve a labeled source into an augmented-class scenario."""
    known_class_ids: tuple[int, ...]
    n_labeled: int = 500
    m_unlabeled: int = 1000
    n_test: int = 1000
    prior_shift_alpha: float = 0.0
    synthetic_spec: Optional[SyntheticSpec] = None
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "known_class_ids", tuple(int(c) for c in self.known_class_ids))
        if not self.known_class_ids:
            raise ScenarioError("known_class_ids must not be empty")
        if len(set(self.known_class_ids)) != len(self.known_class_ids):
            raise ScenarioError(f"duplicate known class ids: {self.known_class_ids}")
        for name in ("n_labeled", "m_unlabeled", "n_test"):
            if getattr(self, name) < 1:
                raise ScenarioError(f"{name} must be positive")
        if not 0.0 <= self.prior_shift_alpha < 1.0:
            raise ScenarioError(f"prior_shift_alpha must lie in [0, 1), got {self.prior_shift_alpha}")

    @property
    def k(self) -> int:
        return len(self.known_class_ids)


@dataclass(frozen=True)
class LacScenario:
    """Labeled known-class data, unlabeled test-distribution data and a test split.

    Test labels use k+1 for every augmented class.
    """
    labeled: Dataset
    unlabeled: Dataset
    test: Dataset
    k: int
    theta_true: Optional[float]
    class_map: dict[int, int]  # source label -> scenario label
    seed: int
    known_priors: Optional[tuple[float, ...]] = None  # realized per-known-class mass of unlabeled
    indices: Optional[dict[str, np.ndarray]] = None  # rows of the source used by each split

    def __post_init__(self) -> None:
        if self.labeled.labels is None or self.test.labels is None:
            raise ScenarioError("labeled and test splits need labels")
        if self.labeled.labels.size and self.labeled.labels.max() > self.k:
            raise ScenarioError("labeled split contains the augmented class")
        if self.theta_true is not None and not 0.0 <= self.theta_true <= 1.0:
            raise ScenarioError(f"theta_true out of range: {self.theta_true}")

    @property
    def ac_label(self) -> int:
        return self.k + 1


class LossKind(Enum):
    """Supported multi-class losses."""
    GCE = "gce"
    CE = "ce"
    OVR = "ovr"


@dataclass(frozen=True)
class LossSpec:
    """Loss selection. q is only used by GCE."""
    kind: LossKind
    q: float = 0.7

    def __post_init__(self) -> None:
        if self.kind is LossKind.GCE and not 0.0 < self.q <= 1.0:
            raise ValueError(f"GCE q must lie in (0, 1], got {self.q}")

    def __str__(self) -> str:
        if self.kind is LossKind.GCE:
            return f"gce:q={self.q!r}"
        return self.kind.value


class RiskVariant(Enum):
    """Training objectives. SUPERVISED is the labeled-only baseline objective."""
    URE = "ure"
    URE_PENALTY = "nrpr"
    RELU_CORRECTED = "relu"
    ABS_CORRECTED = "abs"
    EULAC_OVR = "eulac"
    PRIOR_SHIFT = "shift"
    SUPERVISED = "supervised"


@dataclass(frozen=True)
class RiskConfig:
    theta_hat: float
    lam: float = 1.0
    t: float = 1.0
    variant: RiskVariant = RiskVariant.URE_PENALTY

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta_hat <= 1.0:
            raise ValueError(f"theta_hat must lie in [0, 1], got {self.theta_hat}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.t < 0:
            raise ValueError(f"t must be >= 0, got {self.t}")

    def __str__(self) -> str:
        if self.variant in (RiskVariant.URE_PENALTY, RiskVariant.PRIOR_SHIFT):
            return f"{self.variant.value}:t={self.t!r},lambda={self.lam!r}"
        return self.variant.value


@dataclass(frozen=True)
class PriorShiftConfig:
    """Per-known-class test priors theta_te[i] for class i+1."""
    theta_te: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta_te", tuple(float(v) for v in self.theta_te))
        if not self.theta_te:
            raise ValueError("theta_te must not be empty")
        if any(v < 0 for v in self.theta_te):
            raise ValueError(f"theta_te entries must be >= 0: {self.theta_te}")
        if sum(self.theta_te) > 1.0 + 1e-12:
            raise ValueError(f"theta_te sums to {sum(self.theta_te)} > 1")

    @property
    def total(self) -> float:
        return float(sum(self.theta_te))


@dataclass(frozen=True)
class DiscreteDistributionSpec:
    """Finite-support known-class and augmented-class distributions.

    Known-class support point i carries class label kc_labels[i] and
    probability kc_probs[i]; augmented support point j has ac_probs[j].
    """
    theta: float
    kc_probs: tuple[float, ...]
    kc_labels: tuple[int, ...]
    ac_probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")
        if len(self.kc_probs) != len(self.kc_labels):
            raise ValueError("kc_probs and kc_labels differ in length")
        for name in ("kc_probs", "ac_probs"):
            probs = getattr(self, name)
            if not probs or any(p < 0 for p in probs) or abs(math.fsum(probs) - 1.0) > 1e-12:
                raise ValueError(f"{name} is not a normalized distribution")


DEFAULT_LAMBDA_GRID = tuple(round(0.05 * i, 2) for i in range(20))


@dataclass(frozen=True)
class KernelConfig:
    """RBF kernel and grid settings for mixture-proportion estimation.

    bandwidth None means median heuristic times bandwidth_scale.
    """
    kind: str = "rbf"
    bandwidth: Optional[float] = None
    bandwidth_scale: float = 1.0
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    frankwolfe_iters: int = 500
    slope_threshold: float = 0.7

    def __post_init__(self) -> None:
        if self.kind != "rbf":
            raise ValueError(f"unsupported kernel kind: {self.kind}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if not self.bandwidth_scale > 0:
            raise ValueError(f"bandwidth scale must be positive, got {self.bandwidth_scale}")
        grid = self.lambda_grid
        if len(grid) < 2 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("lambda_grid must be increasing with at least two points")
        if grid[0] < 0 or grid[-1] >= 1:
            raise ValueError("lambda_grid must lie within [0, 1)")
        if self.frankwolfe_iters < 1:
            raise ValueError("frankwolfe_iters must be positive")
        if not self.slope_threshold > 0:
            raise ValueError("slope_threshold must be positive")


@dataclass(frozen=True)
class ThetaEstimate:
    """Estimated mixture proportion with the distance curve behind it."""
    theta: float
    bandwidth: float
    lambdas: tuple[float, ...]
    distances: tuple[float, ...]  # sqrt of the squared RKHS distance at each lambda


@dataclass(frozen=True)
class TrainConfig:
    risk: RiskConfig
    loss: LossSpec
    learning_rate: float = 1e-2
    weight_decay: float = 1e-4
    epochs: int = 1500
    batch_size: Optional[int] = None  # labeled mini-batch size; None trains full batch
    seed: int = 0
    model: str = "linear"
    hidden: int = 64

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if self.model not in ("linear", "mlp"):
            raise ValueError(f"model must be 'linear' or 'mlp', got {self.model!r}")
        if self.hidden < 1:
            raise ValueError(f"hidden must be >= 1, got {self.hidden}")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    objective: float
    pac_risk: float
    penalty: float


@dataclass
class MetricsReport:
    """Test metrics of one evaluation run."""
    accuracy: float
    macro_f1: float
    auc: float
    confusion: np.ndarray = field(repr=False)
    n_test: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "accuracy": float(self.accuracy),
            "macro_f1": float(self.macro_f1),
            "auc": float(self.auc),
            "n_test": int(self.n_test),
            "confusion": self.confusion.astype(int).tolist(),
        }
