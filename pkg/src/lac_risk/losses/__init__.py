"""Loss functions."""
from .functions import (
    GceLimit,
    gce_limit_check,
    log_softmax,
    loss_grad,
    loss_value,
    loss_values_and_grads,
    parse_loss_spec,
    psi,
    sigmoid,
    softmax,
)

__all__ = [
    "GceLimit",
    "gce_limit_check",
    "log_softmax",
    "loss_grad",
    "loss_value",
    "loss_values_and_grads",
    "parse_loss_spec",
    "psi",
    "sigmoid",
    "softmax",
]
