"""Tensor and differentiation tape.

Operations executed inside an active :class:`Tape` whose operands require
gradients are recorded in execution order, which is a topological order of the
graph. ``Tape.backward`` walks the record once in reverse. Outside a tape,
operations run without recording (inference mode).
"""

from __future__ import annotations

from contextvars import ContextVar
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from mslesion.exceptions import TapeError

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]

_ACTIVE_TAPE: ContextVar[Tape | None] = ContextVar("mslesion_active_tape", default=None)


class Tensor:
    """N-dimensional float array with an optional gradient."""

    __slots__ = ("data", "grad", "name", "requires_grad", "tape")

    def __init__(
        self, data: np.ndarray | float | Sequence[float], *,
        requires_grad: bool = False, name: str | None = None,
    ) -> None:
        arr = np.asarray(data)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float32)
        self.data: np.ndarray = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self.tape: Tape | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def item(self) -> float:
        if self.data.size != 1:
            raise TapeError(f"item() needs a single element, tensor has shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data

    def grad_or_zeros(self) -> np.ndarray:
        return self.grad if self.grad is not None else np.zeros_like(self.data)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, dtype={self.dtype}, grad={self.requires_grad})"


@dataclass
class _Node:
    out: Tensor
    parents: tuple[Tensor, ...]
    backward_fn: BackwardFn


class Tape:
    """Ordered record of differentiable operations."""

    def __init__(self) -> None:
        self._nodes: list[_Node] = []
        self._consumed = False
        self._token: object | None = None

    def __enter__(self) -> Tape:
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, *exc: object) -> None:
        _ACTIVE_TAPE.reset(self._token)  # type: ignore[arg-type]
        self._token = None

    def __len__(self) -> int:
        return len(self._nodes)

    def record(self, out: Tensor, parents: tuple[Tensor, ...], backward_fn: BackwardFn) -> None:
        if self._consumed:
            raise TapeError("cannot record on a tape that has already been differentiated")
        out.requires_grad = True
        out.tape = self
        self._nodes.append(_Node(out, parents, backward_fn))

    def reset(self) -> None:
        """Drop the record so the tape can be reused."""
        self._nodes.clear()
        self._consumed = False

    def backward(self, loss: Tensor) -> None:
        """Populate ``.grad`` of every tensor that ``loss`` depends on."""
        if self._consumed:
            raise TapeError("backward() already ran on this tape; call reset() first")
        if loss.tape is not self:
            raise TapeError("loss was not produced on this tape")
        if loss.data.size != 1:
            raise TapeError(f"loss must be a scalar, got shape {loss.shape}")

        for node in self._nodes:
            node.out.grad = None
            for parent in node.parents:
                parent.grad = None
        loss.grad = np.ones_like(loss.data)

        for node in reversed(self._nodes):
            if node.out.grad is None:
                continue
            grads = node.backward_fn(node.out.grad)
            for parent, g in zip(node.parents, grads, strict=True):
                if g is None or not parent.requires_grad:
                    continue
                if parent.grad is None:
                    parent.grad = g.astype(parent.dtype, copy=True)
                else:
                    parent.grad = parent.grad + g
        self._consumed = True


def record_op(data: np.ndarray, parents: Sequence[Tensor], backward_fn: BackwardFn) -> Tensor:
    """Wrap an op result, recording it on the active tape when needed."""
    out = Tensor(data)
    tape = _ACTIVE_TAPE.get()
    if tape is not None and any(p.requires_grad for p in parents):
        tape.record(out, tuple(parents), backward_fn)
    return out


def backward(loss: Tensor) -> None:
    """Differentiate ``loss`` on the tape that produced it."""
    if loss.tape is None:
        raise TapeError("loss was not produced inside a Tape")
    loss.tape.backward(loss)


def gradients(loss: Tensor, tensors: Sequence[Tensor]) -> list[np.ndarray]:
    """Differentiate ``loss`` and return gradients for ``tensors`` (zeros if unreached)."""
    backward(loss)
    return [t.grad_or_zeros() for t in tensors]


@dataclass
class RunningStats:
    """Batch-norm running mean and variance of one layer."""

    mean: np.ndarray
    var: np.ndarray

    @classmethod
    def fresh(cls, channels: int, dtype: type = np.float32) -> RunningStats:
        return cls(mean=np.zeros(channels, dtype=dtype), var=np.ones(channels, dtype=dtype))
