"""Universal adversarial patch: one optimized square pasted anywhere.

The patch is trained with Adam to maximize the victim's mean log-probability
of a fixed target class when pasted at random locations over batches of
training images, then applied at a seeded random location per image.
"""

import numpy as np

from .. import nn
from ..errors import InvalidInputError
from ..nn import Model
from ..taxonomy import AttackClass, PATCH
from .records import AdversarialRecord, finalize_perturbation


def patch_attack_train(
    model: Model,
    train_images: np.ndarray,
    target_label: int,
    patch_side: int,
    iters: int,
    alpha: float,
    seed: int,
    batch_size: int = 32,
) -> tuple[np.ndarray, list[float]]:
    """Optimize a patch in [0,1]; returns (patch, per-iteration objective log).

    The objective is the mean log-probability of the target label over the
    sampled batch; Adam ascends it, and the patch is clipped back into [0,1]
    after every step.
    """
    h, w, c = model.spec.input_shape
    if patch_side >= min(h, w):
        raise InvalidInputError(f"patch side {patch_side} must be smaller than min(H,W)={min(h, w)}")
    rng = np.random.Generator(np.random.PCG64(seed))
    patch = rng.random((patch_side, patch_side, c), dtype=np.float32)
    m = np.zeros(patch.shape, dtype=np.float64)
    v = np.zeros(patch.shape, dtype=np.float64)
    beta1, beta2, eps_hat = 0.9, 0.999, 1e-8
    objective_log: list[float] = []
    n = len(train_images)
    for t in range(1, iters + 1):
        idx = rng.integers(0, n, size=min(batch_size, n))
        batch = train_images[idx].copy()
        rows = rng.integers(0, h - patch_side + 1, size=len(idx))
        cols = rng.integers(0, w - patch_side + 1, size=len(idx))
        for k in range(len(idx)):
            batch[k, rows[k] : rows[k] + patch_side, cols[k] : cols[k] + patch_side, :] = patch
        labels = np.full(len(idx), target_label)
        grads = nn.input_gradient(model, batch, labels)  # d(CE to target)/d(pixels)
        gpatch = np.zeros(patch.shape, dtype=np.float64)
        for k in range(len(idx)):
            gpatch += grads[k, rows[k] : rows[k] + patch_side, cols[k] : cols[k] + patch_side, :]
        gpatch /= len(idx)
        objective_log.append(-_mean_target_ce(model, batch, labels))
        m = beta1 * m + (1 - beta1) * gpatch
        v = beta2 * v + (1 - beta2) * gpatch * gpatch
        m_hat = m / (1 - beta1**t)
        v_hat = v / (1 - beta2**t)
        patch = patch - (alpha * m_hat / (np.sqrt(v_hat) + eps_hat)).astype(np.float32)
        patch = np.clip(patch, 0.0, 1.0)
    return patch, objective_log


def _mean_target_ce(model, batch, labels) -> float:
    logits = nn.forward(model, batch).astype(np.float64)
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    return float(-logp[np.arange(len(labels)), labels].mean())


def patch_location(image_shape, patch_side: int, location_seed: int) -> tuple[int, int]:
    h, w = image_shape[0], image_shape[1]
    rng = np.random.Generator(np.random.PCG64(location_seed))
    return int(rng.integers(0, h - patch_side + 1)), int(rng.integers(0, w - patch_side + 1))


def patch_apply(
    model: Model,
    x: np.ndarray,
    true_label: int,
    patch: np.ndarray,
    target_label: int,
    location_seed: int,
    attack_class: AttackClass | None = None,
    source_id: int = 0,
    pred_before: int | None = None,
) -> AdversarialRecord:
    """Paste the patch at a seeded random location; success means the victim
    now predicts the patch's target label."""
    side = patch.shape[0]
    if side > min(x.shape[0], x.shape[1]):
        raise InvalidInputError("patch is larger than the image")
    if attack_class is None:
        attack_class = AttackClass(PATCH, None, None, 0)
    r, c = patch_location(x.shape, side, location_seed)
    adv = x.copy()
    adv[r : r + side, c : c + side, :] = patch
    delta, x_prime = finalize_perturbation(x, adv)
    if pred_before is None:
        pred_before = int(nn.forward(model, x[None]).argmax(axis=1)[0])
    pred_after = int(nn.forward(model, x_prime[None]).argmax(axis=1)[0])
    return AdversarialRecord(
        source_id=int(source_id),
        x=x.astype(np.float32),
        delta=delta,
        x_prime=x_prime,
        attack_class=attack_class,
        success=bool(pred_after == target_label),
        true_label=int(true_label),
        pred_before=int(pred_before),
        pred_after=pred_after,
        queries=1,
        seed=int(location_seed),
        info={"target_label": int(target_label), "location": [r, c]},
    )
