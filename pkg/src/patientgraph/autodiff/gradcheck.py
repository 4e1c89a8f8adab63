"""Central finite-difference verification of autodiff gradients."""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass

import numpy as np

from patientgraph.autodiff.tensor import FloatArray, Tensor, backward, no_grad

DEFAULT_STEP = 1e-5
DEFAULT_RTOL = 1e-4


@dataclass(frozen=True, slots=True)
class GradientCheckResult:
    name: str
    analytic: FloatArray
    numeric: FloatArray
    rel_error: float
    passed: bool


def relative_error(analytic: FloatArray, numeric: FloatArray, floor: float = 1e-7) -> float:
    """||a - n|| / max(||a|| + ||n||, floor) over the whole parameter."""
    diff = float(np.linalg.norm(analytic - numeric))
    scale = float(np.linalg.norm(analytic) + np.linalg.norm(numeric))
    return diff / max(scale, floor)


def numeric_gradient(
    fn: Callable[[], Tensor],
    param: Tensor,
    step: float = DEFAULT_STEP,
) -> FloatArray:
    grad = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    out = grad.reshape(-1)
    with no_grad():
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + step
            plus = fn().item()
            flat[i] = saved - step
            minus = fn().item()
            flat[i] = saved
            out[i] = (plus - minus) / (2.0 * step)
    return grad


def check_gradients(
    fn: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    step: float = DEFAULT_STEP,
    rtol: float = DEFAULT_RTOL,
) -> list[GradientCheckResult]:
    """
    Compare backward() gradients of the scalar fn() against central differences.

    fn must be deterministic (dropout off or reseeded on every call). Parameters
    the loss does not reach are compared against a zero gradient.
    """
    for p in params.values():
        p.zero_grad()
    backward(fn())
    results: list[GradientCheckResult] = []
    for name, p in params.items():
        analytic = p.grad.copy() if p.grad is not None else np.zeros_like(p.data)
        numeric = numeric_gradient(fn, p, step)
        err = relative_error(analytic, numeric)
        results.append(GradientCheckResult(name, analytic, numeric, err, err <= rtol))
    return results
