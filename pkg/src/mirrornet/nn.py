"""Layers and optimization on top of the tensor engine.

Conv1d is the only parametric layer the architecture needs.  Its forward is a
handful of batched matmuls (one per kernel tap on a zero-padded input), which
is what makes CPU training viable; the backward closure mirrors those matmuls
exactly and skips gradient work for frozen operands.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError, ShapeError
from .tensor import Tensor


class Module:
    """Anything with named parameters.  Deliberately tiny."""

    def named_parameters(self):
        raise NotImplementedError

    def parameters(self):
        return [t for _, t in self.named_parameters()]

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def freeze(self):
        for p in self.parameters():
            p.requires_grad = False

    def unfreeze(self):
        for p in self.parameters():
            p.requires_grad = True

    def state_arrays(self):
        """name -> data array, in declaration order."""
        return {name: p.data for name, p in self.named_parameters()}


class Conv1d(Module):
    """1-D convolution with 'same' zero padding.

    Kernel size is restricted to 1 or 3, which is all the topology uses; for
    k=3 the symmetric padding equals the dilation.  Weights and biases start
    uniform in +-sqrt(1 / (in_channels * kernel_size)).
    """

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int = 1,
                 dilation: int = 1, rng: np.random.Generator = None):
        if kernel_size not in (1, 3):
            raise ConfigError(f"kernel_size must be 1 or 3, got {kernel_size}")
        if dilation < 1:
            raise ConfigError(f"dilation must be >= 1, got {dilation}")
        if rng is None:
            rng = np.random.default_rng()
        self.in_channels = int(in_channels)
        self.out_channels = int(out_channels)
        self.kernel_size = int(kernel_size)
        self.dilation = int(dilation)
        bound = math.sqrt(1.0 / (in_channels * kernel_size))
        self.weight = Tensor(
            rng.uniform(-bound, bound, size=(out_channels, in_channels, kernel_size)),
            requires_grad=True,
        )
        self.bias = Tensor(rng.uniform(-bound, bound, size=out_channels),
                           requires_grad=True)

    def named_parameters(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def __call__(self, x: Tensor) -> Tensor:
        if x.data.ndim != 3:
            raise ShapeError(f"Conv1d wants (B, C, L), got shape {x.shape}")
        b_, c_, l_ = x.shape
        if c_ != self.in_channels:
            raise ShapeError(
                f"Conv1d expected {self.in_channels} input channels, got {c_}"
            )
        w = self.weight.data
        bias = self.bias.data[None, :, None]
        k, d = self.kernel_size, self.dilation

        if k == 1:
            y = np.matmul(w[:, :, 0], x.data) + bias
            xp = None
        else:
            xp = np.zeros((b_, c_, l_ + 2 * d))
            xp[:, :, d:d + l_] = x.data
            y = np.matmul(w[:, :, 0], xp[:, :, 0:l_])
            y += np.matmul(w[:, :, 1], xp[:, :, d:d + l_])
            y += np.matmul(w[:, :, 2], xp[:, :, 2 * d:2 * d + l_])
            y += bias

        out = Tensor._node(y, (x, self.weight, self.bias))
        if out.requires_grad:
            layer = self

            def _bw():
                gy = out.grad  # (B, O, L)
                if layer.bias.requires_grad:
                    layer.bias._accumulate(gy.sum(axis=(0, 2)))
                if k == 1:
                    if layer.weight.requires_grad:
                        gw = np.tensordot(gy, x.data, axes=([0, 2], [0, 2]))
                        layer.weight._accumulate(gw[:, :, None])
                    if x.requires_grad:
                        x._accumulate(np.matmul(w[:, :, 0].T, gy))
                else:
                    if layer.weight.requires_grad:
                        gw = np.empty_like(w)
                        for j in range(3):
                            gw[:, :, j] = np.tensordot(
                                gy, xp[:, :, j * d:j * d + l_], axes=([0, 2], [0, 2])
                            )
                        layer.weight._accumulate(gw)
                    if x.requires_grad:
                        gxp = np.zeros_like(xp)
                        for j in range(3):
                            gxp[:, :, j * d:j * d + l_] += np.matmul(w[:, :, j].T, gy)
                        x._accumulate(gxp[:, :, d:d + l_])

            out._backward = _bw
        return out


def decayed_lr(lr0: float, gamma: float, epoch: int, interval: int) -> float:
    """Stepped exponential decay: lr0 * gamma ** (epoch // interval)."""
    if interval < 1:
        raise ConfigError(f"decay interval must be >= 1, got {interval}")
    return lr0 * gamma ** (epoch // interval)


class Adam:
    """ADAM with standard bias correction and the stepped decay above.

    The learning rate is only changed through set_epoch(), so a caller that
    never touches it gets plain constant-rate ADAM.
    """

    def __init__(self, params, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8, decay_gamma: float = 0.5, decay_interval: int = 1):
        self.params = list(params)
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]
        self.t = 0
        self.lr0 = float(lr)
        self.lr = float(lr)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.decay_gamma = decay_gamma
        self.decay_interval = int(decay_interval)

    def set_epoch(self, epoch: int):
        self.lr = decayed_lr(self.lr0, self.decay_gamma, epoch, self.decay_interval)

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad
            if g is None:
                continue
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.data -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
