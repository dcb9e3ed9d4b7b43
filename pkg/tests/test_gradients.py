import math

import numpy as np
import pytest

from attackprints import nn
from attackprints.errors import InvalidInputError
from attackprints.nn import Conv2d, Dense, Flatten, MaxPool2d, NetworkSpec, Relu, ResidualBlock
from attackprints.nn.gradcheck import finite_diff_check
from attackprints.nn.network import split_params
from attackprints.nn.ops import softmax_cross_entropy

from oracles import naive_cross_entropy


def tiny_spec():
    return NetworkSpec(
        (8, 8, 1),
        (Conv2d(3, 3), Relu(), MaxPool2d(2), Flatten(), Dense(5)),
        classes=5,
    )


def residual_spec():
    return NetworkSpec(
        (8, 8, 1),
        (Conv2d(4, 3, 1, 1), Relu(), MaxPool2d(2), ResidualBlock(4), Flatten(), Dense(5)),
        classes=5,
    )


def test_uniform_logits_loss_is_log_c():
    logits = np.zeros((7, 10))
    loss, _, _ = softmax_cross_entropy(logits, np.zeros(7, dtype=int))
    assert abs(loss - math.log(10)) < 1e-12


def test_large_margin_loss_vanishes():
    logits = np.zeros((1, 10))
    logits[0, 3] = 20.0
    loss, _, _ = softmax_cross_entropy(logits, np.array([3]))
    assert loss < 1e-3


def test_loss_matches_naive_oracle():
    rng = np.random.default_rng(0)
    logits = rng.standard_normal((6, 4))
    labels = rng.integers(0, 4, size=6)
    loss, _, _ = softmax_cross_entropy(logits, labels)
    assert abs(loss - naive_cross_entropy(logits, labels)) < 1e-12


def test_softmax_probabilities_normalized():
    rng = np.random.default_rng(3)
    logits = rng.standard_normal((10, 6)) * 5
    _, _, logp = softmax_cross_entropy(logits, np.zeros(10, dtype=int))
    sums = np.exp(logp).sum(axis=1)
    assert np.max(np.abs(sums - 1.0)) < 1e-6


def test_loss_nonnegative_random():
    rng = np.random.default_rng(4)
    for _ in range(20):
        logits = rng.standard_normal((5, 8)) * rng.uniform(0.1, 10)
        labels = rng.integers(0, 8, size=5)
        loss, _, _ = softmax_cross_entropy(logits, labels)
        assert loss >= 0


def test_label_out_of_range_rejected():
    model = nn.init_model(tiny_spec(), seed=0)
    x = np.zeros((2, 8, 8, 1), dtype=np.float32)
    with pytest.raises(InvalidInputError):
        nn.loss_and_param_gradients(model, x, np.array([0, 5]))


def test_param_gradients_match_finite_differences():
    # Central differences are only a valid oracle where the loss is smooth on
    # [w-h, w+h]; a ReLU/pool kink inside that interval corrupts the numeric
    # side, not the analytic one. These seeds are kink-free at h=1e-3.
    for seed, spec in [(0, tiny_spec()), (1, residual_spec())]:
        model = nn.init_model(spec, seed=seed)
        rng = np.random.default_rng(seed + 1000)
        x = rng.random((4, 8, 8, 1), dtype=np.float32)
        labels = rng.integers(0, 5, size=4)
        err = finite_diff_check(model, x, labels, n_coords=100, h=1e-3, seed=seed)
        assert err < 1e-4


def test_finite_diff_step_sizes_agree():
    model = nn.init_model(tiny_spec(), seed=2)
    rng = np.random.default_rng(2 + 1000)
    x = rng.random((4, 8, 8, 1), dtype=np.float32)
    labels = rng.integers(0, 5, size=4)
    for h in (1e-3, 1e-4):
        assert finite_diff_check(model, x, labels, n_coords=100, h=h, seed=2) < 1e-4


def test_corrupted_gradient_detected():
    # doubling one sampled coordinate's analytic gradient must blow the check
    model = nn.init_model(tiny_spec(), seed=3)
    rng = np.random.default_rng(5)
    x = rng.random((3, 8, 8, 1), dtype=np.float32)
    labels = rng.integers(0, 5, size=3)
    _, grads = nn.loss_and_param_gradients(model, x, labels, dtype=np.float64)
    coord = int(np.argmax(np.abs(grads)))

    import attackprints.nn.gradcheck as gc

    original = nn.loss_and_param_gradients

    def corrupted(model_, batch_, labels_, dtype=np.float32):
        loss, g = original(model_, batch_, labels_, dtype=dtype)
        g = g.copy()
        g[coord] *= 2.0
        return loss, g

    rng_check = np.random.Generator(np.random.PCG64(0))
    # monkeypatch by hand; restore afterwards
    gc.loss_and_param_gradients = corrupted
    try:
        # pick a seed whose sample includes the corrupted coordinate
        for seed in range(50):
            sample = np.random.Generator(np.random.PCG64(seed)).choice(
                model.params.size, size=100, replace=False
            )
            if coord in sample:
                err = finite_diff_check(model, x, labels, n_coords=100, h=1e-3, seed=seed)
                assert err > 0.3
                break
        else:
            pytest.fail("no seed sampled the corrupted coordinate")
    finally:
        gc.loss_and_param_gradients = original
    del rng_check


def test_input_gradient_zero_for_zero_weights():
    model = nn.init_model(tiny_spec(), seed=0)
    model.params = np.zeros_like(model.params)
    x = np.random.default_rng(0).random((8, 8, 1), dtype=np.float32)
    g = nn.input_gradient(model, x, 2)
    assert g.shape == x.shape
    assert np.all(g == 0)


def test_input_gradient_identity_dense_closed_form():
    # flatten->dense(identity): d(loss)/dx = softmax(x) - onehot(label)
    spec = NetworkSpec((1, 1, 2), (Flatten(), Dense(2)), classes=2)
    model = nn.init_model(spec, seed=0)
    views = split_params(spec, model.params)
    views["1.w"][:] = np.eye(2)
    views["1.b"][:] = 0
    x = np.array([0.3, 0.9], dtype=np.float32).reshape(1, 1, 2)
    g = nn.input_gradient(model, x, 1)
    z = x.reshape(2).astype(np.float64)
    p = np.exp(z - z.max())
    p /= p.sum()
    want = p - np.array([0.0, 1.0])
    assert np.max(np.abs(g.reshape(2) - want)) < 1e-6


def test_input_gradient_matches_finite_differences():
    model = nn.init_model(residual_spec(), seed=4)
    rng = np.random.default_rng(6)
    x = rng.random((8, 8, 1), dtype=np.float32)
    label = 3
    g = nn.input_gradient(model, x, label, dtype=np.float64)
    h = 1e-4
    coords = [tuple(c) for c in rng.integers(0, 8, size=(50, 2))]
    from attackprints.nn.ops import softmax_cross_entropy as ce

    def loss_at(xq):
        logits = nn.forward(model, xq.astype(np.float64)[None], dtype=np.float64)
        loss, _, _ = ce(logits, np.array([label]))
        return loss

    for (i, j) in coords:
        xp = x.astype(np.float64).copy()
        xp[i, j, 0] += h
        xm = x.astype(np.float64).copy()
        xm[i, j, 0] -= h
        numeric = (loss_at(xp) - loss_at(xm)) / (2 * h)
        a = g[i, j, 0]
        rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
        assert rel < 1e-4


def test_input_gradient_batch_is_per_sample():
    model = nn.init_model(tiny_spec(), seed=1)
    rng = np.random.default_rng(9)
    x = rng.random((5, 8, 8, 1), dtype=np.float32)
    labels = rng.integers(0, 5, size=5)
    batch_g = nn.input_gradient(model, x, labels)
    for i in range(5):
        single = nn.input_gradient(model, x[i], int(labels[i]))
        assert np.max(np.abs(single - batch_g[i])) < 1e-6
