"""Model state, forward/backward passes, and checkpoint files.

A model is a network spec plus a flat float32 parameter vector and Adam
state. The backward pass walks the layer list in reverse and fills a flat
float64 gradient vector; parameters stay 32-bit while gradient math and
loss reductions run in 64-bit (keeps finite-difference checks tight).
"""

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import FormatError, InvalidInputError
from . import ops
from .network import (
    Conv2d,
    Dense,
    Flatten,
    MaxPool2d,
    NetworkSpec,
    Relu,
    ResidualBlock,
    init_params,
    parse_descriptor,
    split_params,
)

CHECKPOINT_MAGIC = b"AFCK"
CHECKPOINT_VERSION = 1


@dataclass
class Model:
    spec: NetworkSpec
    params: np.ndarray  # float32, flat
    m: np.ndarray  # Adam first moment, float32
    v: np.ndarray  # Adam second moment, float32
    t: int  # Adam step counter
    seed: int

    def __post_init__(self):
        n = self.spec.param_count()
        if self.params.size != n:
            raise InvalidInputError(f"param vector size {self.params.size}, spec needs {n}")
        if self.m.size != n or self.v.size != n:
            raise InvalidInputError("Adam state length does not match parameter count")
        if self.t < 0:
            raise InvalidInputError("Adam step counter must be >= 0")

    def copy(self) -> "Model":
        return Model(self.spec, self.params.copy(), self.m.copy(), self.v.copy(), self.t, self.seed)


def init_model(spec: NetworkSpec, seed: int) -> Model:
    params = init_params(spec, seed)
    zeros = np.zeros_like(params)
    return Model(spec, params, zeros, zeros.copy(), 0, seed)


def _as_batch(x: np.ndarray, input_shape) -> tuple[np.ndarray, bool]:
    if x.shape == tuple(input_shape):
        return x[None], True
    if x.ndim == 4 and x.shape[1:] == tuple(input_shape):
        return x, False
    raise InvalidInputError(f"input shape {x.shape} does not match spec {tuple(input_shape)}")


def _run_forward(spec, views, x, want_cache):
    caches = [] if want_cache else None
    h = x
    for i, layer in enumerate(spec.layers):
        if isinstance(layer, Conv2d):
            h, cache = ops.conv2d_forward(h, views[f"{i}.w"], views[f"{i}.b"], layer.stride, layer.pad)
        elif isinstance(layer, Relu):
            h, cache = ops.relu_forward(h)
        elif isinstance(layer, MaxPool2d):
            h, cache = ops.maxpool_forward(h, layer.kernel)
        elif isinstance(layer, Flatten):
            cache = h.shape
            h = h.reshape(h.shape[0], -1)
        elif isinstance(layer, Dense):
            h, cache = ops.dense_forward(h, views[f"{i}.w"], views[f"{i}.b"])
        elif isinstance(layer, ResidualBlock):
            h1, c1 = ops.conv2d_forward(h, views[f"{i}.w1"], views[f"{i}.b1"], 1, 1)
            a1, _ = ops.relu_forward(h1)
            h2, c2 = ops.conv2d_forward(a1, views[f"{i}.w2"], views[f"{i}.b2"], 1, 1)
            pre = h + h2
            h = np.maximum(pre, 0)
            cache = (c1, h1, c2, pre)
        else:
            raise InvalidInputError(f"unknown layer {layer!r}")
        if want_cache:
            caches.append(cache)
    return h, caches


def _run_backward(spec, views, caches, dlogits, grads_out):
    """Backprop dlogits through the cached forward pass.

    Fills ``grads_out`` (flat float64 dict of arrays) and returns d(input).
    """
    d = dlogits
    for i in reversed(range(len(spec.layers))):
        layer = spec.layers[i]
        cache = caches[i]
        if isinstance(layer, Conv2d):
            d, dw, db = ops.conv2d_backward(d, views[f"{i}.w"], cache)
            grads_out[f"{i}.w"] += dw.astype(np.float64)
            grads_out[f"{i}.b"] += db.astype(np.float64)
        elif isinstance(layer, Relu):
            d = ops.relu_backward(d, cache)
        elif isinstance(layer, MaxPool2d):
            d = ops.maxpool_backward(d, cache)
        elif isinstance(layer, Flatten):
            d = d.reshape(cache)
        elif isinstance(layer, Dense):
            d, dw, db = ops.dense_backward(d, views[f"{i}.w"], cache)
            grads_out[f"{i}.w"] += dw.astype(np.float64)
            grads_out[f"{i}.b"] += db.astype(np.float64)
        elif isinstance(layer, ResidualBlock):
            c1, h1, c2, pre = cache
            dpre = np.where(pre > 0, d, 0)
            da1, dw2, db2 = ops.conv2d_backward(dpre, views[f"{i}.w2"], c2)
            dh1 = np.where(h1 > 0, da1, 0)
            dskip, dw1, db1 = ops.conv2d_backward(dh1, views[f"{i}.w1"], c1)
            grads_out[f"{i}.w1"] += dw1.astype(np.float64)
            grads_out[f"{i}.b1"] += db1.astype(np.float64)
            grads_out[f"{i}.w2"] += dw2.astype(np.float64)
            grads_out[f"{i}.b2"] += db2.astype(np.float64)
            d = dpre + dskip
    return d


def forward(model: Model, batch: np.ndarray, dtype=np.float32) -> np.ndarray:
    """Logits for a batch (N,H,W,C) or a single image (H,W,C)."""
    x, single = _as_batch(batch, model.spec.input_shape)
    views = split_params(model.spec, model.params.astype(dtype, copy=False))
    logits, _ = _run_forward(model.spec, views, x.astype(dtype, copy=False), False)
    out = logits
    if not np.all(np.isfinite(out)):
        raise InvalidInputError("forward pass produced non-finite logits")
    return out[0] if single else out


def _check_labels(labels, classes):
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise InvalidInputError(f"labels must lie in [0, {classes})")
    return labels.astype(np.int64).reshape(-1)


def loss_and_param_gradients(model: Model, batch: np.ndarray, labels, dtype=np.float32):
    """Mean cross-entropy over the batch and flat float64 parameter gradients."""
    x, single = _as_batch(batch, model.spec.input_shape)
    labels = _check_labels(labels, model.spec.classes)
    if labels.size != x.shape[0]:
        raise InvalidInputError("label count does not match batch size")
    flat = model.params.astype(dtype, copy=False)
    views = split_params(model.spec, flat)
    logits, caches = _run_forward(model.spec, views, x.astype(dtype, copy=False), True)
    loss, dlogits, _ = ops.softmax_cross_entropy(logits, labels)
    grads = {name: np.zeros(shape, dtype=np.float64) for name, shape in _grad_shapes(model.spec)}
    _run_backward(model.spec, views, caches, dlogits.astype(dtype), grads)
    flat_grads = np.concatenate([grads[name].reshape(-1) for name, _ in _grad_shapes(model.spec)]) if grads else np.zeros(0)
    return float(loss), flat_grads


def _grad_shapes(spec):
    from .network import param_layout

    return param_layout(spec)


def input_gradient(model: Model, x: np.ndarray, label, dtype=np.float32) -> np.ndarray:
    """Per-sample gradient of the cross-entropy loss w.r.t. the input pixels.

    Accepts a single image (H,W,C) with an int label or a batch (N,H,W,C)
    with a label array; each sample's gradient is independent of batch size.
    """
    xb, single = _as_batch(x, model.spec.input_shape)
    labels = _check_labels(label, model.spec.classes)
    if labels.size != xb.shape[0]:
        raise InvalidInputError("label count does not match batch size")
    views = split_params(model.spec, model.params.astype(dtype, copy=False))
    logits, caches = _run_forward(model.spec, views, xb.astype(dtype, copy=False), True)
    _, dlogits, _ = ops.softmax_cross_entropy(logits, labels)
    dlogits = dlogits * xb.shape[0]  # undo the mean: per-sample loss gradients
    grads = {name: np.zeros(shape, dtype=np.float64) for name, shape in _grad_shapes(model.spec)}
    dx = _run_backward(model.spec, views, caches, dlogits.astype(dtype), grads)
    if not np.all(np.isfinite(dx)):
        raise InvalidInputError("input gradient is non-finite")
    return dx[0] if single else dx


def save_checkpoint(model: Model, path) -> None:
    """Binary checkpoint: magic, version, descriptor, params, Adam state, seed."""
    desc = model.spec.descriptor().encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<I", CHECKPOINT_VERSION))
        f.write(struct.pack("<I", len(desc)))
        f.write(desc)
        f.write(struct.pack("<Q", model.params.size))
        f.write(model.params.astype("<f4").tobytes())
        f.write(model.m.astype("<f4").tobytes())
        f.write(model.v.astype("<f4").tobytes())
        f.write(struct.pack("<QQ", model.t, model.seed))


def load_checkpoint(path) -> Model:
    path = Path(path)
    data = path.read_bytes()
    if data[:4] != CHECKPOINT_MAGIC:
        raise FormatError(f"{path}: bad checkpoint magic {data[:4]!r}")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != CHECKPOINT_VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {version}")
    (desc_len,) = struct.unpack_from("<I", data, 8)
    desc = data[12 : 12 + desc_len].decode("utf-8")
    offset = 12 + desc_len
    (count,) = struct.unpack_from("<Q", data, offset)
    offset += 8
    need = offset + 12 * count + 16
    if len(data) != need:
        raise FormatError(f"{path}: checkpoint truncated ({len(data)} bytes, expected {need})")
    params = np.frombuffer(data, dtype="<f4", count=count, offset=offset).copy()
    offset += 4 * count
    m = np.frombuffer(data, dtype="<f4", count=count, offset=offset).copy()
    offset += 4 * count
    v = np.frombuffer(data, dtype="<f4", count=count, offset=offset).copy()
    offset += 4 * count
    t, seed = struct.unpack_from("<QQ", data, offset)
    return Model(parse_descriptor(desc), params, m, v, t, seed)
