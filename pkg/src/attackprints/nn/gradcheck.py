"""Finite-difference verification of the analytic gradients."""

import numpy as np

from ..errors import InvalidInputError
from . import ops
from .model import Model, _as_batch, _check_labels, _run_forward, loss_and_param_gradients
from .network import split_params


def _loss_at(spec, params_f64, x, labels):
    views = split_params(spec, params_f64)
    logits, _ = _run_forward(spec, views, x, False)
    loss, _, _ = ops.softmax_cross_entropy(logits, labels)
    return loss


def finite_diff_check(
    model: Model,
    batch: np.ndarray,
    labels,
    n_coords: int = 100,
    h: float = 1e-3,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Samples ``n_coords`` parameter coordinates; both sides run in float64
    (parameters cast up once) so the comparison is limited by the truncation
    error of the central difference, not by float32 rounding.
    """
    if n_coords < 1:
        raise InvalidInputError("n_coords must be >= 1")
    x, _ = _as_batch(batch, model.spec.input_shape)
    x = x.astype(np.float64)
    labels = _check_labels(labels, model.spec.classes)
    _, analytic = loss_and_param_gradients(model, batch, labels, dtype=np.float64)

    rng = np.random.Generator(np.random.PCG64(seed))
    coords = rng.choice(model.params.size, size=min(n_coords, model.params.size), replace=False)
    base = model.params.astype(np.float64)
    worst = 0.0
    for c in coords:
        saved = base[c]
        base[c] = saved + h
        loss_plus = _loss_at(model.spec, base, x, labels)
        base[c] = saved - h
        loss_minus = _loss_at(model.spec, base, x, labels)
        base[c] = saved
        numeric = (loss_plus - loss_minus) / (2 * h)
        a = analytic[c]
        err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
        worst = max(worst, err)
    return float(worst)
