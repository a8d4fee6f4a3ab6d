"""Score models, optimizer and training loop."""
from .checkpoint import load_checkpoint, save_checkpoint, train_config_to_dict
from .networks import (
    LinearModel,
    MlpModel,
    Params,
    ScoreModel,
    backward,
    build_model,
    forward,
    model_from_dict,
)
from .optim import AdamState, adam_step
from .training import (
    TrainingBatch,
    TrainResult,
    objective_and_gradients,
    output_count,
    train,
    write_history_csv,
)

__all__ = [
    "load_checkpoint",
    "save_checkpoint",
    "train_config_to_dict",
    "LinearModel",
    "MlpModel",
    "Params",
    "ScoreModel",
    "backward",
    "build_model",
    "forward",
    "model_from_dict",
    "AdamState",
    "adam_step",
    "TrainingBatch",
    "TrainResult",
    "objective_and_gradients",
    "output_count",
    "train",
    "write_history_csv",
]
