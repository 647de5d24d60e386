"""AdamW with decoupled weight decay, plus a linear warmup/decay schedule."""

import logging
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from coderet.errors import EncoderError

logger = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    """First/second moment estimates per parameter, the step count and skipped steps."""
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    skipped: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def optimizer_step(params, grads: Dict[str, np.ndarray], state: OptimizerState, lr: float, weight_decay: float):
    """
    One AdamW update. `params` is any object exposing arrays() and replace(**arrays);
    inputs are not mutated. A non-finite gradient skips the update and bumps the counter.
    Returns (new_params, new_state).
    """
    arrays = params.arrays()
    for name, grad in grads.items():
        if name not in arrays:
            raise EncoderError(f"gradient for unknown parameter '{name}'")
        if grad.shape != arrays[name].shape:
            raise EncoderError(f"gradient shape {grad.shape} != parameter shape {arrays[name].shape} for '{name}'")

    if not all(np.all(np.isfinite(g)) for g in grads.values()):
        logger.warning(f"Non-finite gradient at step {state.step}, update skipped")
        return params, OptimizerState(step=state.step, m=state.m, v=state.v, skipped=state.skipped + 1,
                                      beta1=state.beta1, beta2=state.beta2, eps=state.eps)

    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_m, new_v, updated = dict(state.m), dict(state.v), {}
    for name, grad in grads.items():
        value = arrays[name]
        m = b1 * state.m.get(name, np.zeros_like(value)) + (1 - b1) * grad
        v = b2 * state.v.get(name, np.zeros_like(value)) + (1 - b2) * grad * grad
        m_hat = m / (1 - b1 ** step)
        v_hat = v / (1 - b2 ** step)
        updated[name] = value - lr * weight_decay * value - lr * m_hat / (np.sqrt(v_hat) + state.eps)
        new_m[name], new_v[name] = m, v

    new_state = OptimizerState(step=step, m=new_m, v=new_v, skipped=state.skipped,
                               beta1=b1, beta2=b2, eps=state.eps)
    return params.replace(**updated), new_state


def linear_schedule(step: int, total: int, warmup: int) -> float:
    """LR multiplier: linear warmup over `warmup` steps, then linear decay to 1/(total - warmup)."""
    if warmup > 0 and step < warmup:
        return (step + 1) / warmup
    remaining = max(total - warmup, 1)
    return max(total - step, 1) / remaining
