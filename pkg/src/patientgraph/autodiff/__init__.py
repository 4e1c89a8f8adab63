"""
Minimal dense-tensor engine with tape-based reverse-mode differentiation.

64-bit floats throughout; single-threaded per model instance.
"""

from patientgraph.autodiff.ops import (
    add_bias,
    columns,
    concat,
    dropout,
    elementwise,
    matmul,
    segment_aggregate,
    segment_softmax,
    take_rows,
)
from patientgraph.autodiff.tensor import ComputationTape, Tensor, backward, no_grad

__all__ = [
    "add_bias",
    "ComputationTape",
    "Tensor",
    "backward",
    "columns",
    "concat",
    "dropout",
    "elementwise",
    "matmul",
    "no_grad",
    "segment_aggregate",
    "segment_softmax",
    "take_rows",
]
