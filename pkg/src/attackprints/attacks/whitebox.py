"""White-box L^p-ball attacks: FGSM and projected gradient descent.

Both ascend the victim's cross-entropy loss at the true label (untargeted).
The batch entry points vectorize over images; the single-image forms are
batch size 1. Zero gradients produce no step rather than an error.
"""

import numpy as np

from .. import nn
from ..errors import InvalidInputError
from ..nn import Model
from ..taxonomy import AttackClass, LINF, L2, pgd_step_size
from .records import AdversarialRecord, finalize_perturbation, untargeted_success


def _predict(model: Model, images: np.ndarray) -> np.ndarray:
    return nn.forward(model, images).argmax(axis=1)


def _records_from_adv(model, xs, advs, labels, attack_class, source_ids, queries, info_per=None):
    pred_before = _predict(model, xs)
    deltas = np.empty_like(xs)
    primes = np.empty_like(xs)
    for i in range(len(xs)):
        deltas[i], primes[i] = finalize_perturbation(xs[i], advs[i])
    pred_after = _predict(model, primes)
    records = []
    for i in range(len(xs)):
        records.append(
            AdversarialRecord(
                source_id=int(source_ids[i]),
                x=xs[i],
                delta=deltas[i],
                x_prime=primes[i],
                attack_class=attack_class,
                success=untargeted_success(int(labels[i]), int(pred_before[i]), int(pred_after[i])),
                true_label=int(labels[i]),
                pred_before=int(pred_before[i]),
                pred_after=int(pred_after[i]),
                queries=int(queries),
                seed=0,
                info=dict(info_per[i]) if info_per else {},
            )
        )
    return records


def fgsm_batch(model: Model, xs: np.ndarray, labels: np.ndarray, eps: float, attack_class: AttackClass, source_ids=None):
    if eps < 0:
        raise InvalidInputError("eps must be >= 0")
    if source_ids is None:
        source_ids = np.zeros(len(xs), dtype=np.int64)
    grads = nn.input_gradient(model, xs, labels)
    advs = np.clip(xs + np.float32(eps) * np.sign(grads, dtype=np.float32), 0.0, 1.0)
    return _records_from_adv(model, xs, advs.astype(np.float32), labels, attack_class, source_ids, queries=1)


def fgsm(model: Model, x: np.ndarray, label: int, eps: float, attack_class: AttackClass | None = None, source_id: int = 0) -> AdversarialRecord:
    if attack_class is None:
        attack_class = AttackClass("fgsm", LINF, float(eps), 0)
    return fgsm_batch(model, x[None], np.array([label]), eps, attack_class, np.array([source_id]))[0]


def _project_l2(deltas: np.ndarray, eps: float) -> np.ndarray:
    flat = deltas.reshape(len(deltas), -1)
    norms = np.sqrt(np.sum(flat.astype(np.float64) ** 2, axis=1))
    scale = np.ones(len(deltas))
    over = norms > eps
    scale[over] = eps / norms[over]
    return (flat * scale[:, None]).reshape(deltas.shape).astype(np.float32)


def pgd_batch(
    model: Model,
    xs: np.ndarray,
    labels: np.ndarray,
    norm: str,
    eps: float,
    steps: int,
    step_size: float | None = None,
    attack_class: AttackClass | None = None,
    source_ids=None,
):
    """Iterated gradient ascent with projection onto the eps-ball around x.

    L-inf takes sign steps; L2 takes normalized-gradient steps. After every
    step the perturbation is projected onto the ball and onto the [0,1] box.
    """
    if steps < 1:
        raise InvalidInputError("steps must be >= 1")
    if norm not in (LINF, L2):
        raise InvalidInputError(f"unsupported norm {norm!r}")
    if step_size is None:
        step_size = pgd_step_size(eps, steps)
    if attack_class is None:
        attack_class = AttackClass("pgd", norm, float(eps), 0)
    if source_ids is None:
        source_ids = np.zeros(len(xs), dtype=np.int64)
    eps32 = np.float32(eps)
    step32 = np.float32(step_size)
    delta = np.zeros_like(xs)
    loss_first = None
    for _ in range(steps):
        current = np.clip(xs + delta, 0.0, 1.0).astype(np.float32)
        grads = nn.input_gradient(model, current, labels)
        if loss_first is None:
            loss_first = _per_sample_loss(model, current, labels)
        if norm == LINF:
            delta = delta + step32 * np.sign(grads).astype(np.float32)
            delta = np.clip(delta, -eps32, eps32)
        else:
            flat = grads.reshape(len(xs), -1)
            norms = np.sqrt(np.sum(flat.astype(np.float64) ** 2, axis=1))
            unit = np.zeros_like(flat)
            nz = norms > 0  # zero-gradient iterate: no step this iteration
            unit[nz] = flat[nz] / norms[nz, None]
            delta = delta + step32 * unit.reshape(delta.shape).astype(np.float32)
            delta = _project_l2(delta, eps)
        delta = (np.clip(xs + delta, 0.0, 1.0) - xs).astype(np.float32)
    advs = np.clip(xs + delta, 0.0, 1.0).astype(np.float32)
    loss_last = _per_sample_loss(model, advs, labels)
    info = [{"loss_first": float(a), "loss_last": float(b)} for a, b in zip(loss_first, loss_last)]
    return _records_from_adv(model, xs, advs, labels, attack_class, source_ids, queries=steps, info_per=info)


def _per_sample_loss(model, images, labels):
    logits = nn.forward(model, images).astype(np.float64)
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    return -logp[np.arange(len(labels)), labels]


def pgd(
    model: Model,
    x: np.ndarray,
    label: int,
    norm: str,
    eps: float,
    steps: int,
    step_size: float | None = None,
    attack_class: AttackClass | None = None,
    source_id: int = 0,
) -> AdversarialRecord:
    return pgd_batch(
        model, x[None], np.array([label]), norm, eps, steps, step_size, attack_class, np.array([source_id])
    )[0]
