"""
Differentiable operations beyond basic arithmetic.

Covers exactly what the LSTM-GNN needs: dense matmul, pointwise activations,
concatenation, row gather, column slicing, segment reductions (message
aggregation onto destination nodes), segment softmax (attention) and
inverted dropout.
"""

from __future__ import annotations

from collections.abc import Sequence
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse, special

from patientgraph.autodiff.tensor import FloatArray, Tensor
from patientgraph.errors import DimensionError, DomainError
from patientgraph.validation import first_violation

Activation = Literal["sigmoid", "tanh", "relu", "elu", "exp", "log1p", "log", "leaky_relu"]
AggregateMode = Literal["mean", "sum", "max"]
IntArray = NDArray[np.int64]

LEAKY_SLOPE = 0.2


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: inner dimensions disagree for {a.shape} x {b.shape}")
    da, db = a.data, b.data

    def adjoint(g: FloatArray) -> tuple[FloatArray, FloatArray]:
        return g @ db.T, da.T @ g

    return Tensor._from_op(da @ db, "matmul", (a, b), adjoint)


def elementwise(op: Activation, x: Tensor) -> Tensor:
    d = x.data
    if op == "sigmoid":
        out = special.expit(d)

        def adjoint(g: FloatArray) -> tuple[FloatArray]:
            return (g * out * (1.0 - out),)

    elif op == "tanh":
        out = np.tanh(d)

        def adjoint(g: FloatArray) -> tuple[FloatArray]:
            return (g * (1.0 - out * out),)

    elif op == "relu":
        out = np.maximum(d, 0.0)

        def adjoint(g: FloatArray) -> tuple[FloatArray]:
            return (g * (d > 0.0),)

    elif op == "leaky_relu":
        out = np.where(d > 0.0, d, LEAKY_SLOPE * d)

        def adjoint(g: FloatArray) -> tuple[FloatArray]:
            return (g * np.where(d > 0.0, 1.0, LEAKY_SLOPE),)

    elif op == "elu":
        out = np.where(d > 0.0, d, np.expm1(np.minimum(d, 0.0)))

        def adjoint(g: FloatArray) -> tuple[FloatArray]:
            return (g * np.where(d > 0.0, 1.0, out + 1.0),)

    elif op == "exp":
        out = np.exp(d)

        def adjoint(g: FloatArray) -> tuple[FloatArray]:
            return (g * out,)

    elif op == "log1p":
        ok = d > -1.0
        if not np.all(ok):
            idx = first_violation(~ok)
            raise DomainError(f"log1p: entry at index {idx} is {d[idx]!r}, must be > -1")
        out = np.log1p(d)

        def adjoint(g: FloatArray) -> tuple[FloatArray]:
            return (g / (1.0 + d),)

    elif op == "log":
        ok = d > 0.0
        if not np.all(ok):
            idx = first_violation(~ok)
            raise DomainError(f"log: entry at index {idx} is {d[idx]!r}, must be > 0")
        out = np.log(d)

        def adjoint(g: FloatArray) -> tuple[FloatArray]:
            return (g / d,)

    else:
        raise DomainError(f"unknown elementwise op: {op}")

    return Tensor._from_op(out, op, (x,), adjoint)


def add_bias(x: Tensor, bias: Tensor) -> Tensor:
    """Row-broadcast add of a 1-D bias onto an (n x d) tensor."""
    if x.ndim != 2 or bias.shape != (x.shape[1],):
        raise DimensionError(f"add_bias: bias {bias.shape} does not fit {x.shape}")
    return x + bias


def sigmoid(x: Tensor) -> Tensor:
    return elementwise("sigmoid", x)


def tanh(x: Tensor) -> Tensor:
    return elementwise("tanh", x)


def elu(x: Tensor) -> Tensor:
    return elementwise("elu", x)


def exp(x: Tensor) -> Tensor:
    return elementwise("exp", x)


def log1p(x: Tensor) -> Tensor:
    return elementwise("log1p", x)


def log(x: Tensor) -> Tensor:
    return elementwise("log", x)


def square(x: Tensor) -> Tensor:
    return x * x


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not parts:
        raise DimensionError("concat: nothing to concatenate")
    if len(parts) == 1:
        return parts[0]
    ndim = parts[0].ndim
    ax = axis % ndim
    ref = parts[0].shape
    for p in parts[1:]:
        if p.ndim != ndim or any(
            p.shape[i] != ref[i] for i in range(ndim) if i != ax
        ):
            shapes = ", ".join(str(q.shape) for q in parts)
            raise DimensionError(f"concat on axis {axis}: non-axis dimensions differ in {shapes}")
    sizes = [p.shape[ax] for p in parts]
    cuts = np.cumsum(sizes)[:-1]

    def adjoint(g: FloatArray) -> list[FloatArray]:
        return list(np.split(g, cuts, axis=ax))

    data = np.concatenate([p.data for p in parts], axis=ax)
    return Tensor._from_op(data, "concat", tuple(parts), adjoint)


def take_rows(x: Tensor, index: ArrayLike) -> Tensor:
    """Gather rows x[index]; repeated indices accumulate in the adjoint."""
    idx = np.asarray(index, dtype=np.int64)
    n = x.shape[0]
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexError(f"take_rows: index out of range for {n} rows")
    shape = x.shape

    def adjoint(g: FloatArray) -> tuple[FloatArray]:
        out = np.zeros(shape)
        np.add.at(out, idx, g)
        return (out,)

    return Tensor._from_op(x.data[idx], "take_rows", (x,), adjoint)


def columns(x: Tensor, start: int, stop: int) -> Tensor:
    """Column slice x[:, start:stop] of a 2-D tensor."""
    if x.ndim != 2 or not 0 <= start <= stop <= x.shape[1]:
        raise DimensionError(f"columns: slice [{start}:{stop}] invalid for shape {x.shape}")
    shape = x.shape

    def adjoint(g: FloatArray) -> tuple[FloatArray]:
        out = np.zeros(shape)
        out[:, start:stop] = g
        return (out,)

    return Tensor._from_op(x.data[:, start:stop], "columns", (x,), adjoint)


def _segment_matrix(segments: IntArray, num_segments: int) -> sparse.csr_matrix:
    e = segments.shape[0]
    return sparse.csr_matrix(
        (np.ones(e), (segments, np.arange(e))),
        shape=(num_segments, e),
    )


def segment_aggregate(
    values: Tensor,
    segments: ArrayLike,
    num_segments: int,
    mode: AggregateMode = "mean",
) -> Tensor:
    """
    Reduce rows of values (E x d) into num_segments rows by segment id.

    Empty segments yield zero rows for every mode. For max, the adjoint flows
    to the first row (in edge order) attaining the maximum of each column.
    """
    seg = np.asarray(segments, dtype=np.int64).reshape(-1)
    if values.ndim != 2 or values.shape[0] != seg.shape[0]:
        raise DimensionError(
            f"segment_aggregate: values {values.shape} do not match {seg.shape[0]} segment ids"
        )
    if seg.size and (seg.min() < 0 or seg.max() >= num_segments):
        bad = int(seg[(seg < 0) | (seg >= num_segments)][0])
        raise IndexError(f"segment_aggregate: segment id {bad} outside [0, {num_segments})")
    e, d = values.shape
    counts = np.bincount(seg, minlength=num_segments).astype(np.float64)

    if mode in ("sum", "mean"):
        s = _segment_matrix(seg, num_segments)
        summed = np.asarray(s @ values.data).reshape(num_segments, d)
        scale = 1.0 / np.maximum(counts, 1.0) if mode == "mean" else np.ones(num_segments)
        out = summed * scale[:, None]

        def adjoint(g: FloatArray) -> tuple[FloatArray]:
            return ((g * scale[:, None])[seg],)

        return Tensor._from_op(out, f"segment_{mode}", (values,), adjoint)

    if mode == "max":
        out = np.full((num_segments, d), -np.inf)
        np.maximum.at(out, seg, values.data)
        empty = counts == 0
        out[empty] = 0.0
        hits = values.data == out[seg]
        first = np.full((num_segments, d), e, dtype=np.int64)
        np.minimum.at(first, seg, np.where(hits, np.arange(e)[:, None], e))

        def adjoint(g: FloatArray) -> tuple[FloatArray]:
            grad = np.zeros((e, d))
            valid = first < e
            rows = first[valid]
            cols = np.nonzero(valid)[1]
            grad[rows, cols] = g[valid]
            return (grad,)

        return Tensor._from_op(out, "segment_max", (values,), adjoint)

    raise DomainError(f"unknown aggregation mode: {mode}")


def segment_softmax(logits: Tensor, segments: ArrayLike, num_segments: int) -> Tensor:
    """Softmax of logits (E x H) over the rows sharing a segment, per column."""
    seg = np.asarray(segments, dtype=np.int64).reshape(-1)
    if logits.shape[0] == 0:
        return logits
    peak = np.full((num_segments, logits.shape[1]), -np.inf)
    np.maximum.at(peak, seg, logits.data)
    shifted = logits - Tensor(peak[seg])
    weights = exp(shifted)
    totals = segment_aggregate(weights, seg, num_segments, "sum")
    return weights / take_rows(totals, seg)


def dropout(
    x: Tensor,
    rate: float,
    rng: np.random.Generator | None,
    training: bool,
) -> Tensor:
    """Inverted dropout; identity when not training or rate == 0."""
    if not training or rate <= 0.0 or rng is None:
        return x
    keep = rng.random(x.shape) >= rate
    return x * Tensor(keep / (1.0 - rate))


