"""Layer forward/backward primitives on NHWC numpy arrays.

Every forward returns (output, cache); every backward takes (dout, cache) and
returns (dx, dict of parameter gradients). Convolution uses an im2col lowering
so the heavy lifting is a single GEMM per layer.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv2d_forward(x, w, b, stride, pad):
    n, h, wd, c = x.shape
    k = w.shape[0]
    xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0))) if pad else x
    win = sliding_window_view(xp, (k, k), axis=(1, 2))  # N, H', W', C, k, k
    win = win[:, ::stride, ::stride]
    oh, ow = win.shape[1], win.shape[2]
    cols = win.transpose(0, 1, 2, 4, 5, 3).reshape(n * oh * ow, k * k * c)
    cols = np.ascontiguousarray(cols)
    out = cols @ w.reshape(k * k * c, -1) + b
    out = out.reshape(n, oh, ow, -1)
    cache = (cols, x.shape, (k, stride, pad, c))
    return out, cache


def conv2d_backward(dout, w, cache):
    cols, x_shape, (k, stride, pad, c) = cache
    n, h, wd, _ = x_shape
    _, oh, ow, oc = dout.shape
    dflat = dout.reshape(n * oh * ow, oc)
    dw = (cols.T @ dflat).reshape(w.shape)
    db = dflat.sum(axis=0)
    dcols = (dflat @ w.reshape(k * k * c, oc).T).reshape(n, oh, ow, k, k, c)
    dxp = np.zeros((n, h + 2 * pad, wd + 2 * pad, c), dtype=dout.dtype)
    for i in range(k):
        for j in range(k):
            dxp[:, i : i + stride * oh : stride, j : j + stride * ow : stride, :] += dcols[
                :, :, :, i, j, :
            ]
    dx = dxp[:, pad : pad + h, pad : pad + wd, :] if pad else dxp
    return dx, dw, db


def relu_forward(x):
    return np.maximum(x, 0), x


def relu_backward(dout, x):
    return np.where(x > 0, dout, 0)


def maxpool_forward(x, k):
    n, h, w, c = x.shape
    oh, ow = h // k, w // k
    xc = x[:, : oh * k, : ow * k, :]
    xr = (
        xc.reshape(n, oh, k, ow, k, c)
        .transpose(0, 1, 3, 5, 2, 4)
        .reshape(n, oh, ow, c, k * k)
    )
    idx = xr.argmax(axis=-1)  # ties resolve to the first maximum, deterministically
    out = np.take_along_axis(xr, idx[..., None], axis=-1)[..., 0]
    return out, (idx, x.shape, k)


def maxpool_backward(dout, cache):
    idx, x_shape, k = cache
    n, h, w, c = x_shape
    oh, ow = h // k, w // k
    dxr = np.zeros((n, oh, ow, c, k * k), dtype=dout.dtype)
    np.put_along_axis(dxr, idx[..., None], dout[..., None], axis=-1)
    dxc = (
        dxr.reshape(n, oh, ow, c, k, k)
        .transpose(0, 1, 4, 2, 5, 3)
        .reshape(n, oh * k, ow * k, c)
    )
    if oh * k == h and ow * k == w:
        return dxc
    dx = np.zeros(x_shape, dtype=dout.dtype)
    dx[:, : oh * k, : ow * k, :] = dxc
    return dx


def dense_forward(x, w, b):
    return x @ w + b, x


def dense_backward(dout, w, x):
    dw = x.T @ dout
    db = dout.sum(axis=0)
    dx = dout @ w.T
    return dx, dw, db


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy and d(loss)/d(logits), reduced in float64.

    Returns (loss, dlogits, log_probs). ``dlogits`` carries the 1/N factor of
    the mean; use ``per_sample=True`` gradients by multiplying back N.
    """
    z = logits.astype(np.float64)
    z = z - z.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logp = z - logsum
    n = logits.shape[0]
    loss = -logp[np.arange(n), labels].mean()
    dlogits = np.exp(logp)
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    return loss, dlogits, logp
