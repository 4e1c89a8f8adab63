"""Tests for autodiff/ops.py.

Hand examples per op, domain and shape errors, and finite-difference
gradient checks of every differentiable op.
"""

import math

import numpy as np
import pytest

from patientgraph.autodiff import (
    Tensor,
    backward,
    columns,
    concat,
    dropout,
    elementwise,
    matmul,
    segment_aggregate,
    segment_softmax,
    take_rows,
)
from patientgraph.autodiff.gradcheck import GradientCheckResult, check_gradients
from patientgraph.autodiff.ops import add_bias
from patientgraph.errors import DimensionError, DomainError


def assert_all_pass(results: list[GradientCheckResult]) -> None:
    failed = [(r.name, r.rel_error) for r in results if not r.passed]
    assert not failed, failed


class TestMatmul:
    def test_identity(self) -> None:
        out = matmul(Tensor([[1.0, 0.0], [0.0, 1.0]]), Tensor([[3.0, 4.0], [5.0, 6.0]]))
        np.testing.assert_array_equal(out.data, [[3.0, 4.0], [5.0, 6.0]])

    def test_row_times_column(self) -> None:
        out = matmul(Tensor([[1.0, 2.0]]), Tensor([[3.0], [4.0]]))
        np.testing.assert_array_equal(out.data, [[11.0]])

    def test_zero_annihilates_with_zero_gradient(self) -> None:
        a = Tensor([[1.0, 2.0], [3.0, 4.0]], requires_grad=True)
        backward(matmul(a, Tensor(np.zeros((2, 3)))).sum())
        assert a.grad is not None
        np.testing.assert_array_equal(a.grad, np.zeros((2, 2)))

    def test_inner_mismatch_names_both_shapes(self) -> None:
        with pytest.raises(DimensionError, match=r"\(2, 3\) x \(2, 3\)"):
            matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))

    def test_gradcheck(self, rng: np.random.Generator) -> None:
        a = Tensor(rng.normal(size=(3, 4)), requires_grad=True)
        b = Tensor(rng.normal(size=(4, 2)), requires_grad=True)

        def loss() -> Tensor:
            out = matmul(a, b)
            return (out * out).sum()

        assert_all_pass(check_gradients(loss, {"a": a, "b": b}))


class TestElementwise:
    def test_sigmoid_of_zero(self) -> None:
        assert elementwise("sigmoid", Tensor(0.0)).item() == 0.5

    def test_tanh_of_zero(self) -> None:
        assert elementwise("tanh", Tensor(0.0)).item() == 0.0

    def test_log1p_of_e_minus_one(self) -> None:
        assert elementwise("log1p", Tensor(math.e - 1.0)).item() == pytest.approx(1.0)

    def test_relu_and_elu_negative_branch(self) -> None:
        x = Tensor([-1.0, 2.0])
        np.testing.assert_array_equal(elementwise("relu", x).data, [0.0, 2.0])
        np.testing.assert_allclose(elementwise("elu", x).data, [math.exp(-1.0) - 1.0, 2.0])

    def test_leaky_relu_slope(self) -> None:
        np.testing.assert_allclose(elementwise("leaky_relu", Tensor([-2.0, 3.0])).data, [-0.4, 3.0])

    def test_log1p_domain_error_names_index(self) -> None:
        with pytest.raises(DomainError, match=r"\(1,\)"):
            elementwise("log1p", Tensor([0.0, -1.5, 2.0]))

    def test_log_domain_error(self) -> None:
        with pytest.raises(DomainError):
            elementwise("log", Tensor([[1.0, 0.0]]))

    @pytest.mark.parametrize("op", ["sigmoid", "tanh", "elu", "exp", "log1p", "leaky_relu"])
    def test_gradcheck(self, op: str, rng: np.random.Generator) -> None:
        # keep entries away from 0 so the piecewise ops stay smooth under the step
        signs = np.ones((2, 3)) if op == "log1p" else rng.choice([-1.0, 1.0], size=(2, 3))
        x = Tensor(rng.uniform(0.2, 0.9, size=(2, 3)) * signs, requires_grad=True)

        def loss() -> Tensor:
            y = elementwise(op, x)
            return (y * y).sum()

        assert_all_pass(check_gradients(loss, {"x": x}))


class TestConcat:
    def test_columns_interleave(self) -> None:
        out = concat([Tensor([[1.0], [2.0]]), Tensor([[3.0], [4.0]])], axis=1)
        np.testing.assert_array_equal(out.data, [[1.0, 3.0], [2.0, 4.0]])

    def test_single_part_is_same_object(self) -> None:
        t = Tensor([1.0])
        assert concat([t]) is t

    def test_shape_arithmetic(self) -> None:
        out = concat([Tensor(np.ones((2, 3))), Tensor(np.ones((2, 5)))], axis=1)
        assert out.shape == (2, 8)

    def test_mismatched_non_axis_dims_raise(self) -> None:
        with pytest.raises(DimensionError):
            concat([Tensor(np.ones((2, 3))), Tensor(np.ones((3, 3)))], axis=1)

    def test_empty_raises(self) -> None:
        with pytest.raises(DimensionError):
            concat([])

    def test_gradient_splits_back(self) -> None:
        a = Tensor(np.ones((2, 1)), requires_grad=True)
        b = Tensor(np.ones((2, 2)), requires_grad=True)
        weights = Tensor([[1.0, 2.0, 3.0]])
        backward((concat([a, b], axis=1) * weights).sum())
        assert a.grad is not None and b.grad is not None
        np.testing.assert_array_equal(a.grad, [[1.0], [1.0]])
        np.testing.assert_array_equal(b.grad, [[2.0, 3.0], [2.0, 3.0]])


class TestRowsAndColumns:
    def test_take_rows_repeated_index_accumulates(self) -> None:
        x = Tensor([[1.0], [2.0]], requires_grad=True)
        backward(take_rows(x, [1, 1, 0]).sum())
        assert x.grad is not None
        np.testing.assert_array_equal(x.grad, [[1.0], [2.0]])

    def test_take_rows_out_of_range(self) -> None:
        with pytest.raises(IndexError):
            take_rows(Tensor(np.ones((2, 2))), [2])

    def test_columns_slice_and_gradient(self) -> None:
        x = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
        out = columns(x, 1, 3)
        np.testing.assert_array_equal(out.data, [[1.0, 2.0], [4.0, 5.0]])
        backward(out.sum())
        assert x.grad is not None
        np.testing.assert_array_equal(x.grad, [[0.0, 1.0, 1.0], [0.0, 1.0, 1.0]])

    def test_columns_bad_slice(self) -> None:
        with pytest.raises(DimensionError):
            columns(Tensor(np.ones((2, 3))), 2, 5)

    def test_add_bias_shape_checked(self) -> None:
        with pytest.raises(DimensionError):
            add_bias(Tensor(np.ones((2, 3))), Tensor(np.ones(2)))


class TestSegmentAggregate:
    def test_mean_of_two(self) -> None:
        out = segment_aggregate(Tensor([[2.0], [4.0]]), [0, 0], 1, "mean")
        np.testing.assert_array_equal(out.data, [[3.0]])

    @pytest.mark.parametrize("mode", ["mean", "sum", "max"])
    def test_singletons_unchanged(self, mode: str) -> None:
        values = np.array([[1.0, -2.0], [3.0, 4.0], [-5.0, 6.0]])
        out = segment_aggregate(Tensor(values), [2, 0, 1], 3, mode)
        np.testing.assert_array_equal(out.data, values[[1, 2, 0]])

    @pytest.mark.parametrize("mode", ["mean", "sum", "max"])
    def test_empty_segment_is_zero_row(self, mode: str) -> None:
        out = segment_aggregate(Tensor([[1.0], [2.0]]), [0, 0], 3, mode)
        np.testing.assert_array_equal(out.data[1:], [[0.0], [0.0]])

    def test_id_out_of_range(self) -> None:
        with pytest.raises(IndexError):
            segment_aggregate(Tensor([[1.0]]), [3], 2, "sum")

    def test_length_mismatch(self) -> None:
        with pytest.raises(DimensionError):
            segment_aggregate(Tensor([[1.0], [2.0]]), [0], 1, "sum")

    def test_max_gradient_goes_to_first_argmax(self) -> None:
        x = Tensor([[1.0], [5.0], [5.0]], requires_grad=True)
        backward(segment_aggregate(x, [0, 0, 0], 1, "max").sum())
        assert x.grad is not None
        np.testing.assert_array_equal(x.grad, [[0.0], [1.0], [0.0]])

    @pytest.mark.parametrize("mode", ["mean", "sum", "max"])
    def test_gradcheck(self, mode: str, rng: np.random.Generator) -> None:
        x = Tensor(rng.normal(size=(6, 2)), requires_grad=True)
        seg = [0, 1, 0, 2, 1, 0]

        def loss() -> Tensor:
            out = segment_aggregate(x, seg, 4, mode)
            return (out * out).sum()

        assert_all_pass(check_gradients(loss, {"x": x}))


class TestSegmentSoftmax:
    def test_weights_sum_to_one_per_segment(self, rng: np.random.Generator) -> None:
        seg = np.array([0, 0, 1, 1, 1, 2])
        out = segment_softmax(Tensor(rng.normal(size=(6, 3))), seg, 3)
        totals = np.zeros((3, 3))
        np.add.at(totals, seg, out.data)
        np.testing.assert_allclose(totals, np.ones((3, 3)))

    def test_equal_logits_are_uniform(self) -> None:
        out = segment_softmax(Tensor(np.zeros((4, 1))), [0, 0, 0, 0], 1)
        np.testing.assert_allclose(out.data, np.full((4, 1), 0.25))

    def test_gradcheck(self, rng: np.random.Generator) -> None:
        x = Tensor(rng.normal(size=(5, 2)), requires_grad=True)
        w = Tensor(rng.normal(size=(5, 2)))

        def loss() -> Tensor:
            return (segment_softmax(x, [0, 1, 0, 1, 1], 2) * w).sum()

        assert_all_pass(check_gradients(loss, {"x": x}))


class TestDropout:
    def test_identity_when_not_training(self, rng: np.random.Generator) -> None:
        x = Tensor(np.ones((3, 3)))
        assert dropout(x, 0.5, rng, training=False) is x

    def test_inverted_scaling(self, rng: np.random.Generator) -> None:
        out = dropout(Tensor(np.ones((50, 50))), 0.5, rng, training=True)
        assert set(np.unique(out.data)) <= {0.0, 2.0}
        assert 0.35 < float(np.mean(out.data == 0.0)) < 0.65
