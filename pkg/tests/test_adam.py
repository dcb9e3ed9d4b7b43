import numpy as np
import pytest

from attackprints import nn
from attackprints.errors import InvalidInputError
from attackprints.nn import AdamConfig, adam_step
from attackprints.nn.network import Dense, Flatten, NetworkSpec


def scalar_model():
    spec = NetworkSpec((1, 1, 1), (Flatten(), Dense(1)), classes=1)
    return nn.init_model(spec, seed=0)


def test_config_invariants():
    with pytest.raises(InvalidInputError):
        AdamConfig(alpha=-1)
    with pytest.raises(InvalidInputError):
        AdamConfig(beta1=1.0)
    with pytest.raises(InvalidInputError):
        AdamConfig(eps=0.0)


def test_zero_gradient_leaves_params_and_increments_t():
    model = scalar_model()
    before = model.params.copy()
    adam_step(model, np.zeros(model.params.size), AdamConfig())
    assert np.array_equal(model.params, before)
    assert model.t == 1


def test_first_step_magnitude_is_alpha():
    cfg = AdamConfig(alpha=0.1)
    for g in (0.5, -3.0, 1e-4):
        model = scalar_model()
        before = model.params.copy()
        grads = np.zeros(model.params.size)
        grads[0] = g
        adam_step(model, grads, cfg)
        moved = abs(float(model.params[0] - before[0]))
        want = cfg.alpha * abs(g) / (abs(g) + cfg.eps)
        assert abs(moved - want) < 1e-7
        assert abs(moved - cfg.alpha) < 1e-3


def test_gradient_length_mismatch():
    model = scalar_model()
    with pytest.raises(InvalidInputError):
        adam_step(model, np.zeros(model.params.size + 1), AdamConfig())


def test_quadratic_convergence():
    # minimize (w - 3)^2 from w0 = 0 by running the recurrence itself
    model = scalar_model()
    model.params = np.zeros_like(model.params)
    cfg = AdamConfig(alpha=0.1)
    grads = np.zeros(model.params.size)
    for _ in range(500):
        w = float(model.params[0])
        grads[0] = 2 * (w - 3.0)
        adam_step(model, grads, cfg)
    assert abs(float(model.params[0]) - 3.0) < 1e-2
    assert model.t == 500


def test_deterministic_updates():
    a, b = scalar_model(), scalar_model()
    cfg = AdamConfig(alpha=0.05)
    rng = np.random.default_rng(0)
    seq = rng.standard_normal((20, a.params.size))
    for g in seq:
        adam_step(a, g, cfg)
    for g in seq:
        adam_step(b, g, cfg)
    assert np.array_equal(a.params, b.params)
    assert np.array_equal(a.m, b.m)
    assert np.array_equal(a.v, b.v)
