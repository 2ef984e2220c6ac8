"""Shared test utilities: finite-difference gradients and comparison helpers."""

import numpy as np

from mirrornet.tensor import Tensor


def fd_grad(fn, x, h=1e-6):
    """Central-difference gradient of scalar-valued fn at array x."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = fn(x)
        flat[i] = orig - h
        lo = fn(x)
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * h)
    return g


def rel_err(a, b):
    """Relative error between gradient arrays, safe near zero."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-8)
    return np.max(np.abs(a - b)) / denom


def analytic_grad(build, x):
    """Backprop gradient of a scalar graph built from leaf array x.

    build maps a Tensor leaf to a scalar Tensor; returns the leaf's grad.
    """
    leaf = Tensor(np.array(x, dtype=np.float64), requires_grad=True)
    out = build(leaf)
    out.backward()
    return leaf.grad.copy()


def check_gradient(build, x, h=1e-6, tol=1e-4):
    """Compare backprop and central differences for build(leaf) -> scalar."""

    def numeric(arr):
        leaf = Tensor(np.array(arr, dtype=np.float64), requires_grad=False)
        return build(leaf).item()

    ana = analytic_grad(build, x)
    num = fd_grad(numeric, np.asarray(x, dtype=np.float64), h=h)
    err = rel_err(ana, num)
    assert err < tol, f"gradient mismatch: rel err {err:.3g} >= {tol:g}"
    return err
