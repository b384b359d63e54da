"""Finite-difference battery over every differentiable op.

Each op runs in float64 at small shapes across many seeds; the reported
number is the worst relative error seen. Thresholds: 1e-4 for smooth
ops (conv, linear, bce, sigmoid, pooling means), 1e-3 for batchnorm's
batch-statistics gradient, 1e-6 for relu probed away from its kink.
"""

from __future__ import annotations

import numpy as np

from .tensor import (
    Tensor,
    batch_norm,
    batchnorm_params,
    conv2d,
    conv_params,
    global_avg_pool,
    grad_check,
    linear,
    linear_params,
    max_pool,
    relu,
    sigmoid,
    weighted_bce,
)

_F64 = np.float64


def _t(rng, *shape, scale=1.0, offset=0.0) -> Tensor:
    return Tensor(rng.standard_normal(shape) * scale + offset, requires_grad=True)


def _check_conv(rng) -> float:
    p = conv_params(2, 3, 3, rng, _F64)
    x = _t(rng, 1, 2, 6, 6)
    err = grad_check(lambda a, w, b: conv2d(a, p, 1, 1),
                     [x, p.weights, p.bias], eps=1e-4)
    p2 = conv_params(2, 4, 3, rng, _F64)
    x2 = _t(rng, 2, 2, 7, 7)
    err = max(err, grad_check(lambda a, w, b: conv2d(a, p2, 2, 1),
                              [x2, p2.weights, p2.bias], eps=1e-4))
    return err


def _check_linear(rng) -> float:
    p = linear_params(5, 4, rng, _F64)
    x = _t(rng, 3, 5)
    return grad_check(lambda a, w, b: linear(a, p), [x, p.weights, p.bias], eps=1e-4)


def _check_bce(rng) -> float:
    x = _t(rng, 2, 4, scale=2.0)
    t = (rng.random((2, 4)) < 0.5).astype(_F64)
    w = rng.uniform(0.5, 2.0, 4)
    return grad_check(lambda a: weighted_bce(a, t, w), [x], eps=1e-4)


def _check_batchnorm(rng) -> float:
    p = batchnorm_params(3, _F64)
    x = _t(rng, 2, 3, 4, 4, scale=1.5, offset=0.3)
    return grad_check(lambda a, g, b: batch_norm(a, p, "train"),
                      [x, p.weights, p.bias], eps=1e-4)


def _check_relu(rng) -> float:
    # keep every input at least 0.1 from the kink
    vals = rng.standard_normal((3, 7))
    vals = np.where(np.abs(vals) < 0.1, np.sign(vals) * 0.1 + vals, vals)
    x = Tensor(vals, requires_grad=True)
    return grad_check(lambda a: relu(a), [x], eps=1e-5)


def _check_sigmoid(rng) -> float:
    x = _t(rng, 3, 5, scale=2.0)
    return grad_check(lambda a: sigmoid(a), [x], eps=1e-4)


def _check_max_pool(rng) -> float:
    # resample until every pooling window has well-separated values,
    # so the finite-difference step cannot cross an argmax boundary
    for _ in range(50):
        vals = rng.standard_normal((1, 2, 6, 6))
        windows = vals.reshape(1, 2, 3, 2, 3, 2).transpose(0, 1, 2, 4, 3, 5)
        flat = windows.reshape(-1, 4)
        spread = np.sort(flat, axis=1)
        if np.min(np.diff(spread, axis=1)) > 1e-2:
            break
    x = Tensor(vals, requires_grad=True)
    return grad_check(lambda a: max_pool(a, 2, 2), [x], eps=1e-4)


def _check_gap(rng) -> float:
    x = _t(rng, 2, 3, 4, 5)
    return grad_check(lambda a: global_avg_pool(a), [x], eps=1e-5)


def _check_chain(rng) -> float:
    p1 = linear_params(4, 6, rng, _F64)
    p2 = linear_params(6, 3, rng, _F64)
    x = _t(rng, 2, 4)
    return grad_check(lambda a, w1, w2: linear(relu(linear(a, p1)), p2),
                      [x, p1.weights, p2.weights], eps=1e-4)


_CHECKS = (
    ("conv2d", _check_conv, 1e-4),
    ("linear", _check_linear, 1e-4),
    ("weighted_bce", _check_bce, 1e-4),
    ("batch_norm", _check_batchnorm, 1e-3),
    ("relu", _check_relu, 1e-6),
    ("sigmoid", _check_sigmoid, 1e-4),
    ("max_pool", _check_max_pool, 1e-4),
    ("global_avg_pool", _check_gap, 1e-5),
    ("linear_chain", _check_chain, 1e-4),
)


def run_gradcheck_suite(seeds: int = 20):
    """Run every check over ``seeds`` seeds; returns (name, err, limit, ok)."""
    results = []
    for name, fn, threshold in _CHECKS:
        worst = 0.0
        for seed in range(seeds):
            rng = np.random.default_rng(1000 + seed)
            worst = max(worst, fn(rng))
        results.append((name, worst, threshold, worst < threshold))
    return results
