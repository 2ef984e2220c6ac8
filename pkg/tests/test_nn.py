"""Convolution layers against a naive oracle, Adam, and lr scheduling."""

import numpy as np
import pytest

from helpers import check_gradient
from mirrornet.errors import ConfigError
from mirrornet.nn import Adam, Conv1d, Module, decayed_lr
from mirrornet.tensor import Tensor, mse, relu


def naive_conv1d(x, w, b, dilation):
    """Triple-loop same-length dilated conv with zero padding; the oracle."""
    B, Cin, L = x.shape
    Cout, _, K = w.shape
    half = (K - 1) // 2 * dilation
    y = np.zeros((B, Cout, L))
    for bi in range(B):
        for co in range(Cout):
            for t in range(L):
                acc = b[co]
                for ci in range(Cin):
                    for k in range(K):
                        src = t + (k - (K - 1) // 2) * dilation
                        if 0 <= src < L:
                            acc += w[co, ci, k] * x[bi, ci, src]
                y[bi, co, t] = acc
    return y


@pytest.mark.parametrize("kernel,dilation", [(1, 1), (3, 1), (3, 4), (3, 16)])
def test_conv_forward_matches_naive_oracle(kernel, dilation):
    rng = np.random.default_rng(17)
    layer = Conv1d(3, 5, kernel, dilation=dilation, rng=rng)
    x = rng.normal(size=(2, 3, 40))
    got = layer(Tensor(x, requires_grad=False)).data
    want = naive_conv1d(x, layer.weight.data, layer.bias.data, dilation)
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_conv_rejects_unsupported_kernel():
    with pytest.raises(ConfigError):
        Conv1d(3, 5, 2, rng=np.random.default_rng(0))


def test_conv_init_is_bounded_and_seeded():
    a = Conv1d(4, 6, 3, rng=np.random.default_rng(5))
    b = Conv1d(4, 6, 3, rng=np.random.default_rng(5))
    np.testing.assert_array_equal(a.weight.data, b.weight.data)
    bound = np.sqrt(1.0 / (4 * 3))
    assert np.max(np.abs(a.weight.data)) <= bound
    assert np.max(np.abs(a.bias.data)) <= bound


@pytest.mark.parametrize("kernel,dilation", [(1, 1), (3, 1), (3, 4)])
def test_conv_input_gradient(kernel, dilation):
    rng = np.random.default_rng(23)
    layer = Conv1d(2, 3, kernel, dilation=dilation, rng=rng)
    x0 = rng.normal(size=(2, 2, 10))
    target = rng.normal(size=(2, 3, 10))

    def build(leaf):
        return mse(layer(leaf), Tensor(target, requires_grad=False))

    check_gradient(build, x0, tol=1e-4)


@pytest.mark.parametrize("kernel,dilation", [(1, 1), (3, 1), (3, 4)])
def test_conv_weight_and_bias_gradient(kernel, dilation):
    from helpers import fd_grad, rel_err

    rng = np.random.default_rng(31)
    layer = Conv1d(2, 3, kernel, dilation=dilation, rng=rng)
    x = Tensor(rng.normal(size=(2, 2, 10)), requires_grad=False)
    target = rng.normal(size=(2, 3, 10))

    loss = mse(layer(x), Tensor(target, requires_grad=False))
    loss.backward()
    ana_w = layer.weight.grad.copy()
    ana_b = layer.bias.grad.copy()

    def loss_at_w(w):
        return float(np.mean((naive_conv1d(x.data, w, layer.bias.data, dilation)
                              - target) ** 2))

    def loss_at_b(b):
        return float(np.mean((naive_conv1d(x.data, layer.weight.data, b, dilation)
                              - target) ** 2))

    assert rel_err(ana_w, fd_grad(loss_at_w, layer.weight.data.copy())) < 1e-4
    assert rel_err(ana_b, fd_grad(loss_at_b, layer.bias.data.copy())) < 1e-4


def test_frozen_layer_routes_gradient_but_keeps_weights_gradless():
    rng = np.random.default_rng(7)
    layer = Conv1d(2, 2, 3, rng=rng)
    layer.freeze()
    x = Tensor(rng.normal(size=(1, 2, 8)), requires_grad=True)
    loss = mse(relu(layer(x)), Tensor(np.zeros((1, 2, 8)), requires_grad=False))
    loss.backward()
    assert layer.weight.grad is None
    assert layer.bias.grad is None
    assert x.grad is not None
    assert np.any(x.grad != 0.0)
    layer.unfreeze()
    assert layer.weight.requires_grad


def test_module_helpers_operate_on_named_parameters():
    class Two(Module):
        def __init__(self):
            self.a = Conv1d(1, 1, 1, rng=np.random.default_rng(0))
            self.b = Conv1d(1, 1, 3, rng=np.random.default_rng(1))

        def named_parameters(self):
            out = []
            out += [("a." + n, p) for n, p in self.a.named_parameters()]
            out += [("b." + n, p) for n, p in self.b.named_parameters()]
            return out

    m = Two()
    names = [n for n, _ in m.named_parameters()]
    assert names == ["a.weight", "a.bias", "b.weight", "b.bias"]
    for _, p in m.named_parameters():
        p.grad = np.zeros_like(p.data)
    m.zero_grad()
    assert all(p.grad is None for _, p in m.named_parameters())
    m.freeze()
    assert not any(p.requires_grad for _, p in m.named_parameters())
    m.unfreeze()
    assert all(p.requires_grad for _, p in m.named_parameters())
    state = m.state_arrays()
    assert list(state) == names


def test_decayed_lr_steps():
    assert decayed_lr(1.0, 0.5, 0, 20) == 1.0
    assert decayed_lr(1.0, 0.5, 19, 20) == 1.0
    assert decayed_lr(1.0, 0.5, 20, 20) == 0.5
    assert decayed_lr(1.0, 0.5, 45, 20) == 0.25
    with pytest.raises(ConfigError):
        decayed_lr(1.0, 0.5, 0, 0)


def test_adam_converges_on_quadratic():
    # frozen oracle: 100 steps at lr 0.1 on (w - 3)^2 from 0 lands near 1.93e-2
    w = Tensor(np.array([0.0]), requires_grad=True)
    opt = Adam([w], lr=0.1, decay_interval=10 ** 9)
    for _ in range(100):
        w.zero_grad()
        loss = mse(w, Tensor(np.array([3.0]), requires_grad=False))
        loss.backward()
        opt.step()
    assert abs(w.data[0] - 3.0) == pytest.approx(0.0193, abs=2e-3)


def test_adam_decays_lr_on_epoch_boundary():
    w = Tensor(np.array([0.0]), requires_grad=True)
    opt = Adam([w], lr=1.0, decay_gamma=0.5, decay_interval=2)
    opt.set_epoch(0)
    assert opt.lr == 1.0
    opt.set_epoch(1)
    assert opt.lr == 1.0
    opt.set_epoch(2)
    assert opt.lr == 0.5
    opt.set_epoch(4)
    assert opt.lr == 0.25


def test_adam_skips_parameters_without_gradients():
    w = Tensor(np.array([1.0]), requires_grad=True)
    frozen = Tensor(np.array([5.0]), requires_grad=True)
    opt = Adam([w, frozen], lr=0.1)
    loss = (w * 2.0).sum()
    loss.backward()
    opt.step()
    assert frozen.data[0] == 5.0
    assert w.data[0] != 1.0


def test_adam_first_step_moves_by_lr():
    # with bias correction the first update has magnitude ~lr regardless of
    # gradient scale
    w = Tensor(np.array([0.0]), requires_grad=True)
    opt = Adam([w], lr=0.05)
    (w * 123.0).sum().backward()
    opt.step()
    assert w.data[0] == pytest.approx(-0.05, rel=1e-6)
