"""Adversarial example records: the unit every later stage consumes."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError
from ..taxonomy import AttackClass


def finalize_perturbation(x: np.ndarray, adv: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(delta, x_prime) for a raw attack output.

    delta is the stored artifact; x_prime is recomputed as clamp(x + delta)
    so the reconstruction identity holds bitwise, including after a blob
    round-trip. Victim predictions must be taken on the returned x_prime.
    """
    if adv.shape != x.shape:
        raise InvalidInputError("attacked image shape differs from benign image")
    delta = (np.clip(adv, 0.0, 1.0) - x).astype(np.float32)
    x_prime = np.clip(x + delta, 0.0, 1.0).astype(np.float32)
    return delta, x_prime


@dataclass
class AdversarialRecord:
    source_id: int
    x: np.ndarray  # benign image, float32 in [0,1]
    delta: np.ndarray  # stored perturbation, float32
    x_prime: np.ndarray  # clamp(x + delta, 0, 1), by construction
    attack_class: AttackClass
    success: bool
    true_label: int
    pred_before: int
    pred_after: int
    queries: int  # query count (square) or step count (gradient attacks)
    seed: int
    info: dict = field(default_factory=dict)

    def linf(self) -> float:
        return float(np.abs(self.delta).max()) if self.delta.size else 0.0

    def l2(self) -> float:
        return float(np.sqrt(np.sum(self.delta.astype(np.float64) ** 2)))


def untargeted_success(true_label: int, pred_before: int, pred_after: int) -> bool:
    return pred_before == true_label and pred_after != true_label
