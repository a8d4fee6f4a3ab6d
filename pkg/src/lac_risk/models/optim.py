"""Adam with bias correction and decoupled weight decay."""
from dataclasses import dataclass, field

import numpy as np

from .networks import Params


@dataclass
class AdamState:
    """Moment accumulators keyed like the parameters they track."""
    first_moment: Params = field(default_factory=dict)
    second_moment: Params = field(default_factory=dict)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params: Params) -> "AdamState":
        return cls(
            first_moment={name: np.zeros_like(value) for name, value in params.items()},
            second_moment={name: np.zeros_like(value) for name, value in params.items()},
        )


def adam_step(
    params: Params,
    grads: Params,
    state: AdamState,
    learning_rate: float,
    weight_decay: float = 0.0,
) -> tuple[Params, AdamState]:
    """One Adam update. Returns new parameter arrays and the advanced state.

    Decay shrinks each parameter by (1 - lr * wd) before the Adam update.
    """
    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    first: Params = {}
    second: Params = {}
    updated: Params = {}
    for name, value in params.items():
        g = grads[name]
        if g.shape != value.shape:
            raise ValueError(f"gradient for {name} has shape {g.shape}, parameter has {value.shape}")
        m = b1 * state.first_moment.get(name, np.zeros_like(value)) + (1.0 - b1) * g
        v = b2 * state.second_moment.get(name, np.zeros_like(value)) + (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1**step)
        v_hat = v / (1.0 - b2**step)
        decayed = value * (1.0 - learning_rate * weight_decay)
        updated[name] = decayed - learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
        first[name] = m
        second[name] = v

    new_state = AdamState(
        first_moment=first,
        second_moment=second,
        step=step,
        beta1=b1,
        beta2=b2,
        eps=state.eps,
    )
    return updated, new_state
