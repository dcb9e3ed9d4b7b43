"""Independent straight-line re-implementations used as test oracles.

Everything here is written loop-by-loop from the textbook definitions, with
no reuse of the library's vectorized code paths. Slow on purpose.
"""

import math

import numpy as np


def naive_conv2d(x, w, b, stride, pad):
    """Direct quadruple-loop convolution, NHWC."""
    n, h, wd, c = x.shape
    k, _, _, oc = w.shape
    xp = np.zeros((n, h + 2 * pad, wd + 2 * pad, c))
    xp[:, pad : pad + h, pad : pad + wd, :] = x
    oh = (h + 2 * pad - k) // stride + 1
    ow = (wd + 2 * pad - k) // stride + 1
    out = np.zeros((n, oh, ow, oc))
    for ni in range(n):
        for i in range(oh):
            for j in range(ow):
                patch = xp[ni, i * stride : i * stride + k, j * stride : j * stride + k, :]
                for o in range(oc):
                    out[ni, i, j, o] = np.sum(patch * w[:, :, :, o]) + b[o]
    return out


def naive_maxpool(x, k):
    n, h, w, c = x.shape
    oh, ow = h // k, w // k
    out = np.zeros((n, oh, ow, c))
    for ni in range(n):
        for i in range(oh):
            for j in range(ow):
                for ci in range(c):
                    out[ni, i, j, ci] = x[ni, i * k : (i + 1) * k, j * k : (j + 1) * k, ci].max()
    return out


def naive_dense(x, w, b):
    n, f = x.shape
    out = np.zeros((n, w.shape[1]))
    for ni in range(n):
        for o in range(w.shape[1]):
            out[ni, o] = sum(x[ni, i] * w[i, o] for i in range(f)) + b[o]
    return out


def naive_forward(spec, views, x):
    """Straight-line forward pass over an attackprints NetworkSpec."""
    from attackprints.nn.network import Conv2d, Dense, Flatten, MaxPool2d, Relu, ResidualBlock

    h = x.astype(np.float64)
    for i, layer in enumerate(spec.layers):
        if isinstance(layer, Conv2d):
            h = naive_conv2d(h, views[f"{i}.w"], views[f"{i}.b"], layer.stride, layer.pad)
        elif isinstance(layer, Relu):
            h = np.maximum(h, 0)
        elif isinstance(layer, MaxPool2d):
            h = naive_maxpool(h, layer.kernel)
        elif isinstance(layer, Flatten):
            h = h.reshape(h.shape[0], -1)
        elif isinstance(layer, Dense):
            h = naive_dense(h, views[f"{i}.w"], views[f"{i}.b"])
        elif isinstance(layer, ResidualBlock):
            h1 = naive_conv2d(h, views[f"{i}.w1"], views[f"{i}.b1"], 1, 1)
            a1 = np.maximum(h1, 0)
            h2 = naive_conv2d(a1, views[f"{i}.w2"], views[f"{i}.b2"], 1, 1)
            h = np.maximum(h + h2, 0)
        else:
            raise AssertionError(layer)
    return h


def naive_cross_entropy(logits, labels):
    total = 0.0
    for z, y in zip(logits, labels):
        zmax = max(z)
        denom = sum(math.exp(v - zmax) for v in z)
        total += -(z[y] - zmax - math.log(denom))
    return total / len(labels)


def naive_mse(a, b):
    total = 0.0
    count = 0
    for x, y in zip(a.reshape(-1), b.reshape(-1)):
        total += (float(x) - float(y)) ** 2
        count += 1
    return total / count


def gaussian_kernel(size=11, sigma=1.5):
    half = size // 2
    g = np.array(
        [[math.exp(-(i * i + j * j) / (2 * sigma * sigma)) for j in range(-half, half + 1)]
         for i in range(-half, half + 1)]
    )
    return g / g.sum()


def naive_ssim_gray(a, b, size=11, sigma=1.5, c1=0.01**2, c2=0.03**2):
    """Window-by-window SSIM on one channel, weighted statistics."""
    kern = gaussian_kernel(size, sigma)
    h, w = a.shape
    oh, ow = h - size + 1, w - size + 1
    vals = []
    for i in range(oh):
        for j in range(ow):
            pa = a[i : i + size, j : j + size].astype(np.float64)
            pb = b[i : i + size, j : j + size].astype(np.float64)
            mu_a = float((kern * pa).sum())
            mu_b = float((kern * pb).sum())
            var_a = float((kern * (pa - mu_a) ** 2).sum())
            var_b = float((kern * (pb - mu_b) ** 2).sum())
            cov = float((kern * (pa - mu_a) * (pb - mu_b)).sum())
            num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
            den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
            vals.append(num / den)
    return float(np.mean(vals))


def naive_dct2(block):
    """Type-II orthonormal 2-D DCT by the quadruple-sum definition."""
    n = block.shape[0]
    m = block.shape[1]
    out = np.zeros((n, m))
    for u in range(n):
        for v in range(m):
            s = 0.0
            for i in range(n):
                for j in range(m):
                    s += (
                        block[i, j]
                        * math.cos(math.pi * (2 * i + 1) * u / (2 * n))
                        * math.cos(math.pi * (2 * j + 1) * v / (2 * m))
                    )
            au = math.sqrt(1.0 / n) if u == 0 else math.sqrt(2.0 / n)
            av = math.sqrt(1.0 / m) if v == 0 else math.sqrt(2.0 / m)
            out[u, v] = au * av * s
    return out
