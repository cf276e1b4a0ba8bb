"""Minimal reverse-mode autodiff over float64 numpy arrays.

A ``Tensor`` wraps an ndarray. While a ``GradientTape`` is active, every
operation whose result depends on a parameter (a tensor created with
``requires_grad=True``) is recorded on the tape together with its inputs
and a vector-Jacobian product. ``GradientTape.gradients`` replays the
records in reverse to accumulate d(loss)/d(parameter).

Outside a tape, operations run as plain numpy (fast inference path).
The active tape is thread-local: concurrent inference and parallel
training runs in separate threads do not interfere.
"""

from __future__ import annotations

import threading
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = ["Tensor", "GradientTape", "as_tensor", "concat", "transpose"]

_state = threading.local()


def _tape_stack() -> list["GradientTape"]:
    stack = getattr(_state, "tapes", None)
    if stack is None:
        stack = []
        _state.tapes = stack
    return stack


class Tensor:
    """A float64 array plus enough identity for gradient bookkeeping."""

    __slots__ = ("data", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}{tag})"

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        return _add(self, as_tensor(other))

    def __radd__(self, other):
        return _add(as_tensor(other), self)

    def __sub__(self, other):
        return _sub(self, as_tensor(other))

    def __rsub__(self, other):
        return _sub(as_tensor(other), self)

    def __mul__(self, other):
        return _mul(self, as_tensor(other))

    def __rmul__(self, other):
        return _mul(as_tensor(other), self)

    def __truediv__(self, other):
        return _div(self, as_tensor(other))

    def __rtruediv__(self, other):
        return _div(as_tensor(other), self)

    def __neg__(self):
        return _record_op((self,), -self.data, lambda g: (-g,))

    def __matmul__(self, other):
        return _matmul(self, as_tensor(other))

    # elementwise functions ------------------------------------------------

    def relu(self) -> "Tensor":
        x = self.data
        return _record_op((self,), np.maximum(x, 0.0), lambda g: (g * (x > 0.0),))

    def sigmoid(self) -> "Tensor":
        out = 1.0 / (1.0 + np.exp(-self.data))
        return _record_op((self,), out, lambda g: (g * out * (1.0 - out),))

    def tanh(self) -> "Tensor":
        out = np.tanh(self.data)
        return _record_op((self,), out, lambda g: (g * (1.0 - out * out),))

    def elu(self, alpha: float = 1.0) -> "Tensor":
        x = self.data
        neg = x < 0.0
        out = np.where(neg, alpha * np.expm1(x), x)
        # d/dx alpha*(e^x - 1) = alpha*e^x = out + alpha on the negative branch
        return _record_op((self,), out, lambda g: (g * np.where(neg, out + alpha, 1.0),))

    def exp(self) -> "Tensor":
        out = np.exp(self.data)
        return _record_op((self,), out, lambda g: (g * out,))

    def log(self) -> "Tensor":
        x = self.data
        return _record_op((self,), np.log(x), lambda g: (g / x,))

    def abs(self) -> "Tensor":
        x = self.data
        return _record_op((self,), np.abs(x), lambda g: (g * np.sign(x),))

    __abs__ = abs

    def clip_min(self, floor: float) -> "Tensor":
        x = self.data
        return _record_op((self,), np.maximum(x, floor), lambda g: (g * (x > floor),))

    # reductions / shape ----------------------------------------------------

    def sum(self) -> "Tensor":
        shape = self.data.shape
        return _record_op((self,), self.data.sum(), lambda g: (np.full(shape, g),))

    def mean(self) -> "Tensor":
        shape = self.data.shape
        n = self.data.size
        return _record_op((self,), self.data.mean(), lambda g: (np.full(shape, g / n),))

    def reshape(self, *shape) -> "Tensor":
        old = self.data.shape
        return _record_op((self,), self.data.reshape(*shape), lambda g: (g.reshape(old),))


def as_tensor(value) -> Tensor:
    """Wrap arrays/scalars as constant tensors; pass tensors through."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _record_op(
    inputs: tuple[Tensor, ...],
    out_data: np.ndarray,
    vjp: Callable[[np.ndarray], tuple],
) -> Tensor:
    out = Tensor(out_data)
    # every open tape records independently, so nesting works
    for tape in _tape_stack():
        if any(tape._tracks(t) for t in inputs):
            tape._record(inputs, out, vjp)
    return out


def _add(a: Tensor, b: Tensor) -> Tensor:
    sa, sb = a.data.shape, b.data.shape
    return _record_op(
        (a, b),
        a.data + b.data,
        lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)),
    )


def _sub(a: Tensor, b: Tensor) -> Tensor:
    sa, sb = a.data.shape, b.data.shape
    return _record_op(
        (a, b),
        a.data - b.data,
        lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)),
    )


def _mul(a: Tensor, b: Tensor) -> Tensor:
    da, db = a.data, b.data
    return _record_op(
        (a, b),
        da * db,
        lambda g: (_unbroadcast(g * db, da.shape), _unbroadcast(g * da, db.shape)),
    )


def _div(a: Tensor, b: Tensor) -> Tensor:
    da, db = a.data, b.data
    out = da / db
    return _record_op(
        (a, b),
        out,
        lambda g: (_unbroadcast(g / db, da.shape), _unbroadcast(-g * out / db, db.shape)),
    )


def _matmul(a: Tensor, b: Tensor) -> Tensor:
    da, db = a.data, b.data
    if da.ndim != 2 or db.ndim != 2:
        raise ValueError(f"matmul expects 2-D operands, got {da.shape} @ {db.shape}")
    return _record_op((a, b), da @ db, lambda g: (g @ db.T, da.T @ g))


def transpose(t: Tensor) -> Tensor:
    """Matrix transpose; gradient transposes back."""
    return _record_op((t,), t.data.T, lambda g: (g.T,))


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    """Concatenate tensors along ``axis``; gradient splits back apart."""
    tensors = tuple(as_tensor(t) for t in tensors)
    sizes = [t.data.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _record_op(tensors, np.concatenate([t.data for t in tensors], axis=axis), vjp)


class GradientTape:
    """Records forward operations so a scalar loss can be backpropagated.

    Replaying the records in reverse order visits nodes in a valid
    topological order, including through unrolled recurrent steps, so
    backpropagation through time needs no special handling.
    """

    def __init__(self):
        self._records: list[tuple[tuple[Tensor, ...], Tensor, Callable]] = []
        self._tracked: set[int] = set()

    def __enter__(self) -> "GradientTape":
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _tape_stack().pop()

    def _tracks(self, t: Tensor) -> bool:
        return t.requires_grad or id(t) in self._tracked

    def _record(self, inputs: tuple[Tensor, ...], out: Tensor, vjp: Callable) -> None:
        self._tracked.add(id(out))
        self._records.append((inputs, out, vjp))

    def gradients(
        self, loss: Tensor, params: Iterable[Tensor]
    ) -> dict[Tensor, np.ndarray]:
        """d(loss)/d(p) for every tensor in ``params``.

        Parameters the loss does not depend on get zero gradients.
        """
        if loss.data.size != 1:
            raise ValueError(f"loss must be scalar, got shape {loss.data.shape}")
        params = list(params)
        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        for inputs, out, vjp in reversed(self._records):
            g_out = grads.pop(id(out), None)
            if g_out is None:
                continue
            for inp, g in zip(inputs, vjp(g_out)):
                if not self._tracks(inp):
                    continue
                key = id(inp)
                if key in grads:
                    grads[key] = grads[key] + g
                else:
                    grads[key] = g
        return {p: grads.get(id(p), np.zeros_like(p.data)) for p in params}
