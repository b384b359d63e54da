"""Dense float tensors with a reverse-mode tape.

Everything the two network branches need lives here: convolution,
batch normalization, activations, pooling, fully connected layers, the
weighted binary cross-entropy head, plain SGD, and a finite-difference
gradient checker. Forward values are immutable once produced; parameter
mutation happens only in ``sgd_step``. Convolutions run as im2col
matmuls, so a single-threaded run is bit-deterministic for fixed inputs.

Tensors default to float32 (the checkpoint dtype). Pass float64 arrays
when running numeric gradient checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ArgumentError,
    DegenerateStatsError,
    ShapeMismatchError,
    TapeStateError,
)

Array = np.ndarray


def _as_float(values, dtype=None) -> Array:
    arr = np.asarray(values)
    if dtype is not None:
        return arr.astype(dtype, copy=False)
    if arr.dtype == np.float64:
        return arr
    return arr.astype(np.float32, copy=False)


class Tensor:
    """N-dimensional float array with an optional gradient slot.

    Outputs of the ops below carry tape links back to their inputs;
    ``backward`` walks those links in reverse topological order exactly
    once per forward pass.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backprop", "_op", "_consumed")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        self.data: Array = _as_float(data, dtype)
        self.grad: Array | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._backprop: Callable[[Array], None] | None = None
        self._op: str | None = None
        self._consumed = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def sum(self) -> "Tensor":
        return tensor_sum(self)

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def __repr__(self) -> str:
        op = f", op={self._op}" if self._op else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}{op})"


def _result(data: Array, parents: Sequence[Tensor], op: str,
            backprop: Callable[[Array], None]) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backprop = backprop
        out._op = op
    return out


def _accumulate(t: Tensor, g: Array) -> None:
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.array(g, dtype=t.data.dtype)  # own buffer, never aliased
    else:
        t.grad += g


def backward(loss: Tensor) -> None:
    """Accumulate gradients of a scalar loss into every reachable tensor.

    Raises ArgumentError for non-scalar losses and TapeStateError if any
    node of the tape has already been consumed by a previous backward.
    """
    if loss.size != 1:
        raise ArgumentError(f"backward needs a scalar loss, got shape {loss.shape}")
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, ready = stack.pop()
        if ready:
            order.append(node)
            continue
        if node._backprop is None or id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            stack.append((parent, False))
    for node in order:
        if node._consumed:
            raise TapeStateError("backward already ran over this tape")
    if loss.requires_grad:
        _accumulate(loss, np.ones_like(loss.data))
    # children appear before their consumers in `order`; walk it reversed
    for node in reversed(order):
        node._backprop(node.grad)
        node._consumed = True


def sgd_step(params: Sequence[Tensor], lr: float) -> None:
    """Apply theta <- theta - lr * grad to each parameter and clear grads."""
    for p in params:
        if p.grad is not None:
            p.data -= lr * p.grad
            p.grad = None


# ---------------------------------------------------------------------------
# layer parameters


@dataclass
class LayerParams:
    """Weights of one layer; ``kind`` is conv, batchnorm, or linear.

    For batchnorm, ``weights``/``bias`` hold gamma/beta and the running
    statistics ride along (updated in train-mode forward, used in eval).
    """

    kind: str
    weights: Tensor
    bias: Tensor
    running_mean: Tensor | None = None
    running_var: Tensor | None = None
    momentum: float = 0.1
    epsilon: float = 1e-5

    def trainable(self) -> list[Tensor]:
        return [self.weights, self.bias]


def conv_params(in_ch: int, out_ch: int, k: int, rng: np.random.Generator,
                dtype=np.float32) -> LayerParams:
    if min(in_ch, out_ch, k) < 1:
        raise ArgumentError("conv dimensions must be positive")
    bound = 1.0 / np.sqrt(in_ch * k * k)
    w = rng.uniform(-bound, bound, size=(out_ch, in_ch, k, k)).astype(dtype)
    b = np.zeros(out_ch, dtype=dtype)
    return LayerParams("conv", Tensor(w, requires_grad=True), Tensor(b, requires_grad=True))


def linear_params(in_f: int, out_f: int, rng: np.random.Generator,
                  dtype=np.float32) -> LayerParams:
    if min(in_f, out_f) < 1:
        raise ArgumentError("linear dimensions must be positive")
    bound = 1.0 / np.sqrt(in_f)
    w = rng.uniform(-bound, bound, size=(out_f, in_f)).astype(dtype)
    b = np.zeros(out_f, dtype=dtype)
    return LayerParams("linear", Tensor(w, requires_grad=True), Tensor(b, requires_grad=True))


def batchnorm_params(ch: int, dtype=np.float32, momentum: float = 0.1,
                     epsilon: float = 1e-5) -> LayerParams:
    gamma = Tensor(np.ones(ch, dtype=dtype), requires_grad=True)
    beta = Tensor(np.zeros(ch, dtype=dtype), requires_grad=True)
    rm = Tensor(np.zeros(ch, dtype=dtype))
    rv = Tensor(np.ones(ch, dtype=dtype))
    return LayerParams("batchnorm", gamma, beta, rm, rv, momentum, epsilon)


def _expect_kind(p: LayerParams, kind: str) -> None:
    if p.kind != kind:
        raise ArgumentError(f"expected {kind} params, got {p.kind}")


# ---------------------------------------------------------------------------
# elementwise and structural ops


def tensor_sum(x: Tensor) -> Tensor:
    def back(g: Array) -> None:
        _accumulate(x, np.broadcast_to(g, x.shape))

    return _result(np.asarray(x.data.sum()), (x,), "sum", back)


def projected_sum(x: Tensor, coeffs) -> Tensor:
    """Scalar dot product with fixed coefficients; the gradcheck probe."""
    c = np.asarray(coeffs, dtype=x.data.dtype)
    if c.shape != x.shape:
        raise ShapeMismatchError("projection coefficients", c.shape, x.shape)

    def back(g: Array) -> None:
        _accumulate(x, g * c)

    return _result(np.asarray((x.data * c).sum()), (x,), "projected_sum", back)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeMismatchError("add operands", a.shape, b.shape)

    def back(g: Array) -> None:
        _accumulate(a, g)
        _accumulate(b, g)

    return _result(a.data + b.data, (a, b), "add", back)


def concat(parts: Sequence[Tensor], axis: int = 1) -> Tensor:
    if not parts:
        raise ArgumentError("concat needs at least one tensor")
    offsets = np.cumsum([0] + [p.shape[axis] for p in parts])

    def back(g: Array) -> None:
        for part, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            index = [slice(None)] * g.ndim
            index[axis] = slice(lo, hi)
            _accumulate(part, g[tuple(index)])

    data = np.concatenate([p.data for p in parts], axis=axis)
    return _result(data, tuple(parts), "concat", back)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0

    def back(g: Array) -> None:
        _accumulate(x, g * mask)

    return _result(np.maximum(x.data, 0), (x,), "relu", back)


def _sigmoid(z: Array) -> Array:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sigmoid(x: Tensor) -> Tensor:
    s = _sigmoid(x.data)

    def back(g: Array) -> None:
        _accumulate(x, g * s * (1.0 - s))

    return _result(s, (x,), "sigmoid", back)


# ---------------------------------------------------------------------------
# linear / convolution / pooling


def linear(x: Tensor, p: LayerParams) -> Tensor:
    """Affine map of [N, I] rows by weights [O, I] plus bias [O]."""
    _expect_kind(p, "linear")
    w, b = p.weights, p.bias
    if x.data.ndim != 2 or x.shape[1] != w.shape[1]:
        raise ShapeMismatchError("linear input", x.shape, ("N", w.shape[1]))

    def back(g: Array) -> None:
        _accumulate(x, g @ w.data)
        _accumulate(w, g.T @ x.data)
        _accumulate(b, g.sum(axis=0))

    return _result(x.data @ w.data.T + b.data, (x, w, b), "linear", back)


def _im2col(xp: Array, kh: int, kw: int, stride: int) -> tuple[Array, int, int]:
    """Patch matrix [N, Ho*Wo, C*kh*kw]; row-contiguous for the BLAS paths."""
    view = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(2, 3))
    view = view[:, :, ::stride, ::stride]
    n, c, ho, wo = view.shape[:4]
    cols = np.ascontiguousarray(view.transpose(0, 2, 3, 1, 4, 5))
    return cols.reshape(n, ho * wo, c * kh * kw), ho, wo


def conv2d(x: Tensor, p: LayerParams, stride: int = 1, pad: int = 0) -> Tensor:
    """2D cross-correlation plus bias over [N, C, H, W] input."""
    _expect_kind(p, "conv")
    if stride < 1:
        raise ArgumentError(f"stride must be positive, got {stride}")
    if pad < 0:
        raise ArgumentError(f"padding must be non-negative, got {pad}")
    w, b = p.weights, p.bias
    if x.data.ndim != 4:
        raise ShapeMismatchError("conv input", x.shape, ("N", "C", "H", "W"))
    n, c, h, wid = x.shape
    out_ch, in_ch, kh, kw = w.shape
    if in_ch != c:
        raise ShapeMismatchError("conv channels", x.shape, (n, in_ch, h, wid))
    if h + 2 * pad < kh or wid + 2 * pad < kw:
        raise ShapeMismatchError("conv kernel vs padded input",
                                 (kh, kw), (h + 2 * pad, wid + 2 * pad))
    xp = np.pad(x.data, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x.data
    cols, ho, wo = _im2col(xp, kh, kw, stride)  # [N, L, K]
    w2d = w.data.reshape(out_ch, -1)
    out = np.matmul(cols, w2d.T) + b.data[None, None, :]  # [N, L, O]
    out = np.ascontiguousarray(out.transpose(0, 2, 1)).reshape(n, out_ch, ho, wo)
    hp, wp = xp.shape[2], xp.shape[3]
    length = ho * wo

    def back(g: Array) -> None:
        gflat = g.reshape(n, out_ch, length)
        gmat = np.ascontiguousarray(gflat.transpose(1, 0, 2)).reshape(out_ch, -1)
        _accumulate(w, (gmat @ cols.reshape(n * length, -1)).reshape(w.shape))
        _accumulate(b, gflat.sum(axis=(0, 2)))
        if x.requires_grad:
            g_nlo = np.ascontiguousarray(gflat.transpose(0, 2, 1))
            dcols = np.matmul(g_nlo, w2d)  # [N, L, K]
            d6 = np.ascontiguousarray(
                dcols.reshape(n, ho, wo, c, kh, kw).transpose(0, 3, 4, 5, 1, 2))
            dxp = np.zeros((n, c, hp, wp), dtype=g.dtype)
            for ki in range(kh):
                for kj in range(kw):
                    dxp[:, :, ki:ki + stride * ho:stride,
                        kj:kj + stride * wo:stride] += d6[:, :, ki, kj]
            if pad:
                dxp = dxp[:, :, pad:pad + h, pad:pad + wid]
            _accumulate(x, dxp)

    return _result(out, (x, w, b), "conv2d", back)


def batch_norm(x: Tensor, p: LayerParams, mode: str = "train") -> Tensor:
    """Per-channel normalization over [N, C, H, W].

    Train mode normalizes by batch statistics and updates the running
    estimates in place; eval mode normalizes by the running estimates.
    """
    _expect_kind(p, "batchnorm")
    if mode not in ("train", "eval"):
        raise ArgumentError(f"mode must be train or eval, got {mode!r}")
    if x.data.ndim != 4:
        raise ShapeMismatchError("batch_norm input", x.shape, ("N", "C", "H", "W"))
    gamma, beta = p.weights, p.bias
    axes = (0, 2, 3)
    n, c, h, wid = x.shape
    m = n * h * wid
    eps = p.epsilon

    if mode == "train":
        if m < 2:
            raise DegenerateStatsError(
                f"train-mode batch_norm needs >= 2 elements per channel, got {m}")
        mean = x.data.mean(axis=axes)
        var = x.data.var(axis=axes)
        inv_std = 1.0 / np.sqrt(var + eps)
        xhat = (x.data - mean[None, :, None, None]) * inv_std[None, :, None, None]
        mom = p.momentum
        unbiased = var * (m / (m - 1))
        p.running_mean.data[...] = (1 - mom) * p.running_mean.data + mom * mean
        p.running_var.data[...] = (1 - mom) * p.running_var.data + mom * unbiased

        def back(g: Array) -> None:
            _accumulate(gamma, (g * xhat).sum(axis=axes))
            _accumulate(beta, g.sum(axis=axes))
            if x.requires_grad:
                dxhat = g * gamma.data[None, :, None, None]
                mean_dxhat = dxhat.mean(axis=axes, keepdims=True)
                mean_dxhat_xhat = (dxhat * xhat).mean(axis=axes, keepdims=True)
                dx = (dxhat - mean_dxhat - xhat * mean_dxhat_xhat)
                dx *= inv_std[None, :, None, None]
                _accumulate(x, dx)

    else:
        inv_std = 1.0 / np.sqrt(p.running_var.data + eps)
        xhat = (x.data - p.running_mean.data[None, :, None, None]) \
            * inv_std[None, :, None, None]

        def back(g: Array) -> None:
            _accumulate(gamma, (g * xhat).sum(axis=axes))
            _accumulate(beta, g.sum(axis=axes))
            if x.requires_grad:
                _accumulate(x, g * (gamma.data * inv_std)[None, :, None, None])

    out = gamma.data[None, :, None, None] * xhat + beta.data[None, :, None, None]
    return _result(out, (x, gamma, beta), f"batch_norm[{mode}]", back)


def max_pool(x: Tensor, k: int, stride: int | None = None) -> Tensor:
    """Windowed max; gradient routes to the first row-major argmax per window."""
    if x.data.ndim != 4:
        raise ShapeMismatchError("max_pool input", x.shape, ("N", "C", "H", "W"))
    s = stride if stride is not None else k
    if k < 1 or s < 1:
        raise ArgumentError("pool size and stride must be positive")
    n, c, h, wid = x.shape
    if k > h or k > wid:
        raise ShapeMismatchError("pool window vs input", (k, k), (h, wid))
    view = np.lib.stride_tricks.sliding_window_view(x.data, (k, k), axis=(2, 3))
    view = view[:, :, ::s, ::s]
    n_, c_, ho, wo = view.shape[:4]
    flat = view.reshape(n, c, ho, wo, k * k)
    idx = flat.argmax(axis=-1)  # first maximum in row-major window order
    out = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]

    def back(g: Array) -> None:
        rows = (np.arange(ho) * s)[None, None, :, None] + idx // k
        cols = (np.arange(wo) * s)[None, None, None, :] + idx % k
        dx = np.zeros_like(x.data, dtype=g.dtype)
        ni = np.arange(n)[:, None, None, None]
        ci = np.arange(c)[None, :, None, None]
        np.add.at(dx, (ni, ci, rows, cols), g)
        _accumulate(x, dx)

    return _result(np.ascontiguousarray(out), (x,), "max_pool", back)


def global_avg_pool(x: Tensor) -> Tensor:
    """Spatial mean per channel: [N, C, H, W] -> [N, C]."""
    if x.data.ndim != 4:
        raise ShapeMismatchError("global_avg_pool input", x.shape, ("N", "C", "H", "W"))
    n, c, h, wid = x.shape

    def back(g: Array) -> None:
        _accumulate(x, np.broadcast_to((g / (h * wid))[:, :, None, None], x.shape))

    return _result(x.data.mean(axis=(2, 3)), (x,), "global_avg_pool", back)


# ---------------------------------------------------------------------------
# loss


def weighted_bce(logits: Tensor, targets, weights) -> Tensor:
    """Per-predicate weighted binary cross-entropy from raw logits.

    Returns the mean over rows of sum_p w_p * bce(logit, target), in the
    max(z,0) - z*t + log(1+exp(-|z|)) form so saturated logits stay finite.
    """
    t = np.asarray(targets.data if isinstance(targets, Tensor) else targets,
                   dtype=logits.data.dtype)
    w = np.asarray(weights, dtype=logits.data.dtype)
    if t.shape != logits.shape:
        raise ShapeMismatchError("bce targets", t.shape, logits.shape)
    if w.ndim != 1 or w.shape[0] != logits.shape[-1]:
        raise ShapeMismatchError("bce weights", w.shape, (logits.shape[-1],))
    if not np.all((t == 0) | (t == 1)):
        raise ArgumentError("bce targets must be exactly 0 or 1")
    if np.any(w <= 0):
        raise ArgumentError("bce weights must be strictly positive")
    z = logits.data
    n = z.shape[0]
    per = np.maximum(z, 0) - z * t + np.log1p(np.exp(-np.abs(z)))
    loss = (per * w[None, :]).sum(axis=1).mean()

    def back(g: Array) -> None:
        _accumulate(logits, g * w[None, :] * (_sigmoid(z) - t) / n)

    return _result(np.asarray(loss), (logits,), "weighted_bce", back)


# ---------------------------------------------------------------------------
# finite-difference gradient checking


def grad_check(fn: Callable[..., Tensor], inputs: Sequence[Tensor],
               eps: float = 1e-3, seed: int = 0) -> float:
    """Worst relative error between tape gradients and central differences.

    ``fn`` maps the input tensors to one output tensor; a fixed random
    projection turns that output into the scalar driving both paths.
    Inputs must sit at a differentiable point (keep relu arguments at
    least ``eps`` away from zero). Relative error uses the
    max(|analytic|, |numeric|, 1e-8) denominator.
    """
    rng = np.random.default_rng(seed)
    out = fn(*inputs)
    coeffs = rng.standard_normal(out.shape).astype(out.data.dtype)
    for t in inputs:
        t.grad = None
    backward(projected_sum(out, coeffs))
    analytic = [np.zeros_like(t.data) if t.grad is None else t.grad.copy()
                for t in inputs]

    def probe() -> float:
        return float((fn(*inputs).data * coeffs).sum())

    worst = 0.0
    for t, a in zip(inputs, analytic):
        flat = t.data.reshape(-1)
        aflat = a.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            f_plus = probe()
            flat[i] = orig - eps
            f_minus = probe()
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * eps)
            denom = max(abs(numeric), abs(aflat[i]), 1e-8)
            worst = max(worst, abs(numeric - aflat[i]) / denom)
    return worst
