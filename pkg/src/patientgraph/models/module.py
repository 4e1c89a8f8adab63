"""
Parameter containers.

A Module owns named leaf tensors and child modules, registered explicitly in
construction order. That order is the order of parameters(), state_dict() and
checkpoints, so two models built from the same config line up name for name.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Mapping
from typing import TypeVar

import numpy as np

from patientgraph.autodiff import Tensor, add_bias, matmul
from patientgraph.autodiff.tensor import FloatArray
from patientgraph.errors import DataError, DimensionError

M = TypeVar("M", bound="Module")


class Module:
    def __init__(self) -> None:
        self._params: dict[str, Tensor] = {}
        self._children: dict[str, Module] = {}

    def add_parameter(
        self,
        name: str,
        shape: tuple[int, ...],
        rng: np.random.Generator,
        fan_in: int,
    ) -> Tensor:
        """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation."""
        bound = 1.0 / math.sqrt(max(fan_in, 1))
        p = Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True, name=name)
        self._params[name] = p
        return p

    def add_module(self, name: str, module: M) -> M:
        self._children[name] = module
        return module

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for name, p in self._params.items():
            yield prefix + name, p
        for child_name, child in self._children.items():
            yield from child.named_parameters(f"{prefix}{child_name}.")

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def state_dict(self) -> dict[str, FloatArray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: Mapping[str, FloatArray]) -> None:
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if missing or unexpected:
            raise DataError(f"state mismatch: missing {missing}, unexpected {unexpected}")
        for name, p in own.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != p.shape:
                raise DimensionError(f"{name}: expected shape {p.shape}, got {value.shape}")
            p.data[...] = value

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()


class Linear(Module):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator) -> None:
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.weight = self.add_parameter("weight", (in_dim, out_dim), rng, in_dim)
        self.bias = self.add_parameter("bias", (out_dim,), rng, in_dim)

    def __call__(self, x: Tensor) -> Tensor:
        return add_bias(matmul(x, self.weight), self.bias)
