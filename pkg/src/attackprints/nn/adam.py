"""Adam optimizer with bias correction."""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError
from .model import Model


@dataclass(frozen=True)
class AdamConfig:
    alpha: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 128

    def __post_init__(self):
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise InvalidInputError("Adam betas must lie in (0, 1)")
        if self.alpha <= 0 or self.eps <= 0:
            raise InvalidInputError("Adam alpha and eps must be positive")
        if self.batch_size < 1:
            raise InvalidInputError("batch size must be >= 1")


def adam_step(model: Model, grads: np.ndarray, config: AdamConfig) -> Model:
    """One in-place Adam update; moment math in float64, state stored float32."""
    if grads.size != model.params.size:
        raise InvalidInputError(
            f"gradient length {grads.size} does not match parameter count {model.params.size}"
        )
    g = grads.astype(np.float64, copy=False)
    t = model.t + 1
    m = config.beta1 * model.m.astype(np.float64) + (1 - config.beta1) * g
    v = config.beta2 * model.v.astype(np.float64) + (1 - config.beta2) * g * g
    m_hat = m / (1 - config.beta1**t)
    v_hat = v / (1 - config.beta2**t)
    update = config.alpha * m_hat / (np.sqrt(v_hat) + config.eps)
    model.params = (model.params.astype(np.float64) - update).astype(np.float32)
    model.m = m.astype(np.float32)
    model.v = v.astype(np.float32)
    model.t = t
    return model
