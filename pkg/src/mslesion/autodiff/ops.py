"""Differentiable layer operations on NCHW tensors."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from mslesion.autodiff.tensor import RunningStats, Tensor, record_op
from mslesion.exceptions import AutodiffError, ShapeMismatchError

if TYPE_CHECKING:
    from collections.abc import Sequence


def _require_4d(x: Tensor, op: str) -> None:
    if x.data.ndim != 4:
        raise ShapeMismatchError(f"{op} expects an NCHW tensor, got shape {x.shape}")


def conv_output_size(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


def _scatter_windows(
    target: np.ndarray, values: np.ndarray, i: int, j: int, stride: int,
) -> None:
    """Add ``values`` (N, C, Ho, Wo) into ``target`` at window offset (i, j)."""
    ho, wo = values.shape[2], values.shape[3]
    target[:, :, i:i + stride * (ho - 1) + 1:stride, j:j + stride * (wo - 1) + 1:stride] += values


def conv2d(
    x: Tensor, w: Tensor, b: Tensor | None = None, *, stride: int = 1, padding: int = 0,
) -> Tensor:
    """2D cross-correlation; ``w`` has shape (out, in, k, k)."""
    _require_4d(x, "conv2d")
    n, c, h, wd = x.shape
    if w.data.ndim != 4 or w.shape[1] != c:
        raise ShapeMismatchError(f"conv2d weight {w.shape} does not match input channels {c}")
    o, _, kh, kw = w.shape
    if b is not None and b.shape != (o,):
        raise ShapeMismatchError(f"conv2d bias {b.shape} != ({o},)")
    ho = conv_output_size(h, kh, stride, padding)
    wo = conv_output_size(wd, kw, stride, padding)
    if ho < 1 or wo < 1:
        raise ShapeMismatchError(f"conv2d output would be empty for input {h}x{wd}, kernel {kh}")

    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    win = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride][:, :, :ho, :wo]
    out = np.tensordot(win, w.data, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    if b is not None:
        out = out + b.data[None, :, None, None]
    out = np.ascontiguousarray(out, dtype=x.dtype)

    def backward_fn(g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
        dw = np.tensordot(g, win, axes=([0, 2, 3], [0, 2, 3]))
        dcols = np.tensordot(g, w.data, axes=([1], [0]))  # (N, Ho, Wo, C, kh, kw)
        dxp = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                _scatter_windows(dxp, dcols[..., i, j].transpose(0, 3, 1, 2), i, j, stride)
        dx = dxp[:, :, padding:padding + h, padding:padding + wd]
        db = g.sum(axis=(0, 2, 3)) if b is not None else None
        return dx, dw, db

    parents = (x, w) if b is None else (x, w, b)
    if b is None:
        return record_op(out, parents, lambda g: backward_fn(g)[:2])
    return record_op(out, parents, backward_fn)


def conv_transpose2d(
    x: Tensor, w: Tensor, b: Tensor | None = None, *, stride: int = 2,
) -> Tensor:
    """Non-overlapping transposed convolution (kernel == stride); ``w`` is (in, out, k, k)."""
    _require_4d(x, "conv_transpose2d")
    n, c, h, wd = x.shape
    if w.data.ndim != 4 or w.shape[0] != c:
        raise ShapeMismatchError(f"upconv weight {w.shape} does not match input channels {c}")
    _, o, kh, kw = w.shape
    if kh != stride or kw != stride:
        raise AutodiffError(f"conv_transpose2d supports kernel == stride only, got {kh}/{stride}")
    if b is not None and b.shape != (o,):
        raise ShapeMismatchError(f"upconv bias {b.shape} != ({o},)")

    out = np.tensordot(x.data, w.data, axes=([1], [0]))  # (N, H, W, O, k, k)
    out = out.transpose(0, 3, 1, 4, 2, 5).reshape(n, o, h * kh, wd * kw)
    if b is not None:
        out = out + b.data[None, :, None, None]
    out = np.ascontiguousarray(out, dtype=x.dtype)

    def backward_fn(g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
        g6 = g.reshape(n, o, h, kh, wd, kw)
        dx = np.tensordot(g6, w.data, axes=([1, 3, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
        dw = np.tensordot(x.data, g6, axes=([0, 2, 3], [0, 2, 4]))
        db = g.sum(axis=(0, 2, 3)) if b is not None else None
        return dx, dw, db

    parents = (x, w) if b is None else (x, w, b)
    if b is None:
        return record_op(out, parents, lambda g: backward_fn(g)[:2])
    return record_op(out, parents, backward_fn)


def batchnorm2d(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    stats: RunningStats | None = None,
    *,
    training: bool = True,
    momentum: float = 0.9,
    eps: float = 1e-5,
) -> Tensor:
    """Per-channel batch normalisation.

    Training mode normalises with the biased batch statistics and updates
    ``stats`` as ``stats = momentum * stats + (1 - momentum) * batch``. Eval
    mode normalises with ``stats``.
    """
    _require_4d(x, "batchnorm2d")
    c = x.shape[1]
    if gamma.shape != (c,) or beta.shape != (c,):
        raise ShapeMismatchError(f"batchnorm parameters must have shape ({c},)")
    if x.shape[0] == 0 or x.data.size == 0:
        raise ShapeMismatchError("batchnorm2d needs a non-empty batch")
    axes = (0, 2, 3)
    count = x.data.size // c

    if training:
        mean = x.data.mean(axis=axes)
        var = x.data.var(axis=axes)
        if stats is not None:
            stats.mean[...] = momentum * stats.mean + (1.0 - momentum) * mean
            stats.var[...] = momentum * stats.var + (1.0 - momentum) * var
    else:
        if stats is None:
            raise AutodiffError("eval-mode batchnorm needs running statistics")
        mean, var = stats.mean, stats.var

    inv_std = (1.0 / np.sqrt(var + eps)).astype(x.dtype)
    xhat = (x.data - mean[None, :, None, None]) * inv_std[None, :, None, None]
    out = gamma.data[None, :, None, None] * xhat + beta.data[None, :, None, None]

    def backward_fn(g: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        dgamma = (g * xhat).sum(axis=axes)
        dbeta = g.sum(axis=axes)
        dxhat = g * gamma.data[None, :, None, None]
        if training:
            sum_dxhat = dxhat.sum(axis=axes, keepdims=True)
            sum_dxhat_xhat = (dxhat * xhat).sum(axis=axes, keepdims=True)
            dx = (inv_std[None, :, None, None] / count) * (
                count * dxhat - sum_dxhat - xhat * sum_dxhat_xhat
            )
        else:
            dx = dxhat * inv_std[None, :, None, None]
        return dx, dgamma, dbeta

    return record_op(out.astype(x.dtype), (x, gamma, beta), backward_fn)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return record_op(np.where(mask, x.data, 0).astype(x.dtype), (x,), lambda g: (g * mask,))


def maxpool2d(x: Tensor, *, kernel: int = 3, stride: int = 2, padding: int = 1) -> Tensor:
    """Max pooling; gradients go to the first maximum in window scan order."""
    _require_4d(x, "maxpool2d")
    n, c, h, wd = x.shape
    ho = conv_output_size(h, kernel, stride, padding)
    wo = conv_output_size(wd, kernel, stride, padding)
    if ho < 1 or wo < 1:
        raise ShapeMismatchError(f"maxpool2d output would be empty for input {h}x{wd}")

    xp = np.pad(
        x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding)),
        constant_values=-np.inf,
    )
    win = sliding_window_view(xp, (kernel, kernel), axis=(2, 3))[:, :, ::stride, ::stride]
    win = win[:, :, :ho, :wo].reshape(n, c, ho, wo, kernel * kernel)
    arg = win.argmax(axis=-1)
    out = np.take_along_axis(win, arg[..., None], axis=-1)[..., 0]

    def backward_fn(g: np.ndarray) -> tuple[np.ndarray]:
        dxp = np.zeros(xp.shape, dtype=g.dtype)
        for idx in range(kernel * kernel):
            i, j = divmod(idx, kernel)
            _scatter_windows(dxp, np.where(arg == idx, g, 0), i, j, stride)
        return (dxp[:, :, padding:padding + h, padding:padding + wd],)

    return record_op(np.ascontiguousarray(out), (x,), backward_fn)


def concat_channels(xs: Sequence[Tensor]) -> Tensor:
    if not xs:
        raise ShapeMismatchError("concat_channels needs at least one tensor")
    for x in xs:
        _require_4d(x, "concat_channels")
    base = xs[0].shape
    for x in xs[1:]:
        if (x.shape[0], x.shape[2], x.shape[3]) != (base[0], base[2], base[3]):
            raise ShapeMismatchError(f"cannot concatenate {x.shape} with {base}")
    sizes = np.cumsum([x.shape[1] for x in xs])[:-1]
    out = np.concatenate([x.data for x in xs], axis=1)
    return record_op(out, tuple(xs), lambda g: tuple(np.split(g, sizes, axis=1)))


def add(x: Tensor, y: Tensor) -> Tensor:
    if x.shape != y.shape:
        raise ShapeMismatchError(f"add shape mismatch: {x.shape} vs {y.shape}")
    return record_op(x.data + y.data, (x, y), lambda g: (g, g))


def mul(x: Tensor, y: Tensor) -> Tensor:
    if x.shape != y.shape:
        raise ShapeMismatchError(f"mul shape mismatch: {x.shape} vs {y.shape}")
    return record_op(x.data * y.data, (x, y), lambda g: (g * y.data, g * x.data))


def sum_all(x: Tensor) -> Tensor:
    return record_op(
        np.asarray(x.data.sum(), dtype=x.dtype), (x,),
        lambda g: (np.broadcast_to(g, x.shape).copy(),),
    )


def softmax_channels(x: Tensor) -> Tensor:
    """Softmax over the channel axis of an NCHW tensor."""
    _require_4d(x, "softmax_channels")
    shifted = x.data - x.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=1, keepdims=True)
    return record_op(s, (x,), lambda g: (s * (g - (g * s).sum(axis=1, keepdims=True)),))


def take_channels(x: Tensor, start: int, stop: int | None = None) -> Tensor:
    """Channel slice ``x[:, start:stop]``."""
    _require_4d(x, "take_channels")
    stop = start + 1 if stop is None else stop
    if not 0 <= start < stop <= x.shape[1]:
        raise ShapeMismatchError(f"channel slice {start}:{stop} outside {x.shape[1]} channels")

    def backward_fn(g: np.ndarray) -> tuple[np.ndarray]:
        dx = np.zeros_like(x.data)
        dx[:, start:stop] = g
        return (dx,)

    return record_op(np.ascontiguousarray(x.data[:, start:stop]), (x,), backward_fn)


def fit_spatial(x: Tensor, height: int, width: int) -> Tensor:
    """Zero-pad bottom/right or centre-crop so the spatial dims become (height, width)."""
    _require_4d(x, "fit_spatial")
    h, w = x.shape[2], x.shape[3]
    if (h, w) == (height, width):
        return x
    top = max(0, (h - height) // 2)
    left = max(0, (w - width) // 2)
    keep_h, keep_w = min(h, height), min(w, width)
    out = np.zeros((x.shape[0], x.shape[1], height, width), dtype=x.dtype)
    out[:, :, :keep_h, :keep_w] = x.data[:, :, top:top + keep_h, left:left + keep_w]

    def backward_fn(g: np.ndarray) -> tuple[np.ndarray]:
        dx = np.zeros_like(x.data)
        dx[:, :, top:top + keep_h, left:left + keep_w] = g[:, :, :keep_h, :keep_w]
        return (dx,)

    return record_op(out, (x,), backward_fn)
