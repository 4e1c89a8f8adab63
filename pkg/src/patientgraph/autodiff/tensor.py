"""
Dense float64 tensors with tape-based reverse-mode differentiation.

Every operation that produces a tensor from at least one requires_grad input
appends a _Record (sequence number, op name, inputs, adjoint function) to the
output tensor. backward() gathers the records reachable from the loss into a
ComputationTape, ordered by sequence number, and replays their adjoints in
reverse order. Records hold references to their inputs only, never to their
output, so the graph is a DAG without reference cycles and is freed as soon
as the loss goes out of scope.

Gradients accumulate into .grad of leaf tensors only (like a typical tensor
framework); intermediate adjoints live in the replay's scratch dict.
"""

from __future__ import annotations

import itertools
import threading
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from patientgraph.errors import ContractError, DimensionError

FloatArray = NDArray[np.float64]
Adjoint = Callable[[FloatArray], Sequence[FloatArray | None]]

_SEQUENCE = itertools.count()
_GRAD_STATE = threading.local()


def is_grad_enabled() -> bool:
    return bool(getattr(_GRAD_STATE, "enabled", True))


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable tape recording inside the block (evaluation, finite differences)."""
    previous = is_grad_enabled()
    _GRAD_STATE.enabled = False
    try:
        yield
    finally:
        _GRAD_STATE.enabled = previous


@dataclass(frozen=True, slots=True, eq=False)
class _Record:
    seq: int
    op: str
    inputs: tuple[Tensor, ...]
    adjoint: Adjoint


class Tensor:
    """Dense row-major float64 array with an optional gradient slot."""

    __slots__ = ("data", "requires_grad", "grad", "name", "_record")
    __array_priority__ = 1000.0

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        name: str | None = None,
    ) -> None:
        self.data: FloatArray = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: FloatArray | None = None
        self.name = name
        self._record: _Record | None = None

    @classmethod
    def _from_op(
        cls,
        data: FloatArray,
        op: str,
        inputs: tuple[Tensor, ...],
        adjoint: Adjoint,
    ) -> Tensor:
        out = cls.__new__(cls)
        out.data = np.asarray(data, dtype=np.float64)
        out.grad = None
        out.name = None
        needs = is_grad_enabled() and any(t.requires_grad for t in inputs)
        out.requires_grad = needs
        out._record = _Record(next(_SEQUENCE), op, inputs, adjoint) if needs else None
        return out

    # ------------------------------------------------------------------
    # Introspection
    # ------------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return int(self.data.ndim)

    @property
    def is_leaf(self) -> bool:
        return self._record is None

    @property
    def op(self) -> str | None:
        return None if self._record is None else self._record.op

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> FloatArray:
        return self.data.copy()

    def detach(self) -> Tensor:
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def __add__(self, other: Tensor | float) -> Tensor:
        return add(self, other)

    def __radd__(self, other: float) -> Tensor:
        return add(other, self)

    def __sub__(self, other: Tensor | float) -> Tensor:
        return sub(self, other)

    def __rsub__(self, other: float) -> Tensor:
        return sub(other, self)

    def __mul__(self, other: Tensor | float) -> Tensor:
        return mul(self, other)

    def __rmul__(self, other: float) -> Tensor:
        return mul(other, self)

    def __truediv__(self, other: Tensor | float) -> Tensor:
        return div(self, other)

    def __rtruediv__(self, other: float) -> Tensor:
        return div(other, self)

    def __neg__(self) -> Tensor:
        return mul(self, -1.0)

    def __matmul__(self, other: Tensor) -> Tensor:
        from patientgraph.autodiff.ops import matmul

        return matmul(self, other)

    def sum(self, axis: int | None = None, keepdims: bool = False) -> Tensor:
        return reduce_sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: int | None = None) -> Tensor:
        count = self.data.size if axis is None else self.data.shape[axis]
        return reduce_sum(self, axis=axis) / float(max(count, 1))

    def reshape(self, *shape: int) -> Tensor:
        return reshape(self, shape)

    def backward(self) -> None:
        backward(self)


# ----------------------------------------------------------------------
# Primitive arithmetic (broadcasting limited to numpy rules, adjoints summed
# back to the operand shape)
# ----------------------------------------------------------------------


def as_tensor(x: Tensor | float | ArrayLike) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad: FloatArray, shape: tuple[int, ...]) -> FloatArray:
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    g = grad.sum(axis=tuple(range(extra))) if extra > 0 else grad
    axes = tuple(i for i, size in enumerate(shape) if size == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as exc:
        raise DimensionError(f"{op}: cannot combine shapes {a.shape} and {b.shape}") from exc


def add(a: Tensor | float, b: Tensor | float) -> Tensor:
    ta, tb = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", ta, tb)
    sa, sb = ta.shape, tb.shape

    def adjoint(g: FloatArray) -> tuple[FloatArray, FloatArray]:
        return _unbroadcast(g, sa), _unbroadcast(g, sb)

    return Tensor._from_op(ta.data + tb.data, "add", (ta, tb), adjoint)


def sub(a: Tensor | float, b: Tensor | float) -> Tensor:
    ta, tb = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", ta, tb)
    sa, sb = ta.shape, tb.shape

    def adjoint(g: FloatArray) -> tuple[FloatArray, FloatArray]:
        return _unbroadcast(g, sa), _unbroadcast(-g, sb)

    return Tensor._from_op(ta.data - tb.data, "sub", (ta, tb), adjoint)


def mul(a: Tensor | float, b: Tensor | float) -> Tensor:
    ta, tb = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", ta, tb)
    da, db = ta.data, tb.data

    def adjoint(g: FloatArray) -> tuple[FloatArray, FloatArray]:
        return _unbroadcast(g * db, da.shape), _unbroadcast(g * da, db.shape)

    return Tensor._from_op(da * db, "mul", (ta, tb), adjoint)


def div(a: Tensor | float, b: Tensor | float) -> Tensor:
    ta, tb = as_tensor(a), as_tensor(b)
    _broadcast_shape("div", ta, tb)
    da, db = ta.data, tb.data
    out = da / db

    def adjoint(g: FloatArray) -> tuple[FloatArray, FloatArray]:
        return _unbroadcast(g / db, da.shape), _unbroadcast(-g * out / db, db.shape)

    return Tensor._from_op(out, "div", (ta, tb), adjoint)


def reduce_sum(x: Tensor, axis: int | None = None, keepdims: bool = False) -> Tensor:
    shape = x.shape

    def adjoint(g: FloatArray) -> tuple[FloatArray]:
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    data = np.sum(x.data, axis=axis, keepdims=keepdims)
    return Tensor._from_op(np.asarray(data), "sum", (x,), adjoint)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    original = x.shape
    try:
        data = x.data.reshape(tuple(shape))
    except ValueError as exc:
        raise DimensionError(f"reshape: cannot view {original} as {tuple(shape)}") from exc

    def adjoint(g: FloatArray) -> tuple[FloatArray]:
        return (g.reshape(original),)

    return Tensor._from_op(data, "reshape", (x,), adjoint)


# ----------------------------------------------------------------------
# Tape and backward
# ----------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ComputationTape:
    """Operations reachable from one output, in execution order."""

    output: Tensor
    entries: tuple[tuple[Tensor, _Record], ...]

    @classmethod
    def from_output(cls, output: Tensor) -> ComputationTape:
        seen: set[int] = set()
        found: list[tuple[Tensor, _Record]] = []
        stack = [output]
        while stack:
            t = stack.pop()
            if id(t) in seen or t._record is None:
                continue
            seen.add(id(t))
            found.append((t, t._record))
            stack.extend(t._record.inputs)
        found.sort(key=lambda pair: pair[1].seq)
        return cls(output=output, entries=tuple(found))

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def ops(self) -> list[str]:
        return [record.op for _, record in self.entries]

    def replay(self, seed: FloatArray) -> int:
        """Run adjoints in reverse order; returns how many records were visited."""
        scratch: dict[int, FloatArray] = {id(self.output): seed}
        visited = 0
        for out, record in reversed(self.entries):
            g = scratch.pop(id(out), None)
            visited += 1
            if g is None:
                continue
            for inp, gi in zip(record.inputs, record.adjoint(g), strict=True):
                if gi is None or not inp.requires_grad:
                    continue
                if inp._record is None:
                    inp.grad = gi.copy() if inp.grad is None else inp.grad + gi
                else:
                    prev = scratch.get(id(inp))
                    scratch[id(inp)] = gi if prev is None else prev + gi
        return visited


def backward(loss: Tensor) -> None:
    """Populate .grad of every requires_grad leaf with d(loss)/d(leaf)."""
    if loss.data.size != 1:
        raise ContractError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise ContractError("loss is not connected to any leaf with requires_grad")
    seed = np.ones_like(loss.data)
    if loss._record is None:
        loss.grad = seed if loss.grad is None else loss.grad + seed
        return
    ComputationTape.from_output(loss).replay(seed)


def global_norm(arrays: Sequence[Any]) -> float:
    total = 0.0
    for a in arrays:
        if a is not None:
            total += float(np.sum(np.square(a)))
    return float(np.sqrt(total))
