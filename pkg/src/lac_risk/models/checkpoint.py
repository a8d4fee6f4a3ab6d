"""JSON model checkpoints."""
import json
from dataclasses import asdict
from pathlib import Path
from typing import Any

from lac_risk.core import DataFormatError, TrainConfig
from .networks import ScoreModel, model_from_dict

CHECKPOINT_VERSION = 1


def train_config_to_dict(config: TrainConfig) -> dict[str, Any]:
    data = asdict(config)
    data["risk"] = {
        "variant": config.risk.variant.value,
        "theta_hat": config.risk.theta_hat,
        "lambda": config.risk.lam,
        "t": config.risk.t,
    }
    data["loss"] = str(config.loss)
    return data


def save_checkpoint(path: Path, model: ScoreModel, config: TrainConfig, k: int) -> Path:
    """Write parameters (float64 via repr round-trip), shapes and the training config."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "version": CHECKPOINT_VERSION,
        "k": k,
        "d": model.n_features,
        "n_outputs": model.n_outputs,
        "hidden": getattr(model, "hidden", None),
        "shapes": {name: list(value.shape) for name, value in model.params.items()},
        "model": model.to_dict(),
        "train_config": train_config_to_dict(config),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
    return path


def load_checkpoint(path: Path) -> tuple[ScoreModel, dict[str, Any]]:
    """Return the model and the checkpoint metadata."""
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise DataFormatError(f"unsupported checkpoint version {payload.get('version')!r}", path=path)
    model = model_from_dict(payload["model"])
    for name, shape in payload["shapes"].items():
        if list(model.params[name].shape) != shape:
            raise DataFormatError(f"parameter {name} has shape {model.params[name].shape}, expected {shape}", path=path)
    return model, payload
