"""Score models with hand-written backpropagation.

A model maps a (batch, d) feature matrix to (batch, n_outputs) scores. LAC
training uses k+1 outputs with the last one reserved for the augmented
class; the supervised baselines use k outputs.
"""
from abc import ABC, abstractmethod
from typing import Any

import numpy as np

Params = dict[str, np.ndarray]


class ScoreModel(ABC):
    """Abstract base class for score models."""

    kind: str = ""

    def __init__(self, params: Params):
        self.params = {name: np.array(value, dtype=np.float64) for name, value in params.items()}
        for name, value in self.params.items():
            if not np.all(np.isfinite(value)):
                raise ValueError(f"parameter {name} has non-finite entries")

    @property
    @abstractmethod
    def n_features(self) -> int:
        pass

    @property
    @abstractmethod
    def n_outputs(self) -> int:
        pass

    @abstractmethod
    def forward(self, X: np.ndarray) -> np.ndarray:
        """Scores for a batch."""
        pass

    @abstractmethod
    def backward(self, X: np.ndarray, grad_scores: np.ndarray) -> Params:
        """Parameter gradients of sum(grad_scores * forward(X))."""
        pass

    def _check_input(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected a (batch, {self.n_features}) matrix, got shape {X.shape}")
        return X

    def _check_grad(self, X: np.ndarray, grad_scores: np.ndarray) -> np.ndarray:
        grad_scores = np.asarray(grad_scores, dtype=np.float64)
        if grad_scores.shape != (X.shape[0], self.n_outputs):
            raise ValueError(
                f"score gradient shape {grad_scores.shape} does not match ({X.shape[0]}, {self.n_outputs})"
            )
        return grad_scores

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "params": {name: value.tolist() for name, value in self.params.items()},
        }


class LinearModel(ScoreModel):
    """scores = X W^T + b."""

    kind = "linear"

    @classmethod
    def initialize(cls, n_features: int, n_outputs: int, rng: np.random.Generator) -> "LinearModel":
        return cls({
            "W": rng.normal(0.0, 0.01, size=(n_outputs, n_features)),
            "b": np.zeros(n_outputs),
        })

    @property
    def n_features(self) -> int:
        return int(self.params["W"].shape[1])

    @property
    def n_outputs(self) -> int:
        return int(self.params["W"].shape[0])

    def forward(self, X: np.ndarray) -> np.ndarray:
        X = self._check_input(X)
        return X @ self.params["W"].T + self.params["b"]

    def backward(self, X: np.ndarray, grad_scores: np.ndarray) -> Params:
        X = self._check_input(X)
        G = self._check_grad(X, grad_scores)
        return {"W": G.T @ X, "b": G.sum(axis=0)}


class MlpModel(ScoreModel):
    """One hidden rectifier layer: relu(X W1^T + b1) W2^T + b2."""

    kind = "mlp"

    @classmethod
    def initialize(
        cls, n_features: int, n_outputs: int, hidden: int, rng: np.random.Generator
    ) -> "MlpModel":
        if hidden < 1:
            raise ValueError(f"hidden size must be >= 1, got {hidden}")
        return cls({
            "W1": rng.normal(0.0, np.sqrt(2.0 / n_features), size=(hidden, n_features)),
            "b1": np.zeros(hidden),
            "W2": rng.normal(0.0, np.sqrt(1.0 / hidden), size=(n_outputs, hidden)),
            "b2": np.zeros(n_outputs),
        })

    @property
    def n_features(self) -> int:
        return int(self.params["W1"].shape[1])

    @property
    def n_outputs(self) -> int:
        return int(self.params["W2"].shape[0])

    @property
    def hidden(self) -> int:
        return int(self.params["W1"].shape[0])

    def forward(self, X: np.ndarray) -> np.ndarray:
        X = self._check_input(X)
        H = np.maximum(X @ self.params["W1"].T + self.params["b1"], 0.0)
        return H @ self.params["W2"].T + self.params["b2"]

    def backward(self, X: np.ndarray, grad_scores: np.ndarray) -> Params:
        X = self._check_input(X)
        G = self._check_grad(X, grad_scores)
        Z1 = X @ self.params["W1"].T + self.params["b1"]
        H = np.maximum(Z1, 0.0)
        dZ1 = (G @ self.params["W2"]) * (Z1 > 0)
        return {
            "W1": dZ1.T @ X,
            "b1": dZ1.sum(axis=0),
            "W2": G.T @ H,
            "b2": G.sum(axis=0),
        }


MODEL_KINDS: dict[str, type[ScoreModel]] = {"linear": LinearModel, "mlp": MlpModel}


def build_model(
    kind: str, n_features: int, n_outputs: int, hidden: int, rng: np.random.Generator
) -> ScoreModel:
    if kind == "linear":
        return LinearModel.initialize(n_features, n_outputs, rng)
    if kind == "mlp":
        return MlpModel.initialize(n_features, n_outputs, hidden, rng)
    raise ValueError(f"unknown model kind {kind!r}")


def model_from_dict(data: dict[str, Any]) -> ScoreModel:
    kind = data.get("kind")
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    return MODEL_KINDS[kind]({name: np.array(value) for name, value in data["params"].items()})


def forward(model: ScoreModel, X: np.ndarray) -> np.ndarray:
    return model.forward(X)


def backward(model: ScoreModel, X: np.ndarray, grad_scores: np.ndarray) -> Params:
    return model.backward(X, grad_scores)
