"""Tests for training/losses.py."""

import math

import numpy as np
import pytest

from patientgraph.autodiff import Tensor, backward
from patientgraph.errors import ConfigError, DimensionError, DomainError
from patientgraph.training.losses import joint_loss, loss_ihm, loss_los


def los_prediction_with_loss(y: float, loss: float) -> float:
    """A prediction whose single-sample squared-log error against y equals loss."""
    return math.expm1(math.log1p(y) + math.sqrt(loss))


class TestLossIhm:
    def test_half_everywhere(self) -> None:
        assert loss_ihm(Tensor([0.5, 0.5, 0.5]), [0, 1, 1]).item() == pytest.approx(math.log(2))

    def test_single_sample(self) -> None:
        assert loss_ihm(Tensor([0.25]), [1]).item() == pytest.approx(-math.log(0.25))

    def test_saturating_limit(self) -> None:
        assert loss_ihm(Tensor([1 - 1e-12, 1e-12]), [1, 0]).item() < 1e-11

    @pytest.mark.parametrize("bad", [0.0, 1.0, 1.5])
    def test_outside_open_interval(self, bad: float) -> None:
        with pytest.raises(DomainError, match="index 1"):
            loss_ihm(Tensor([0.5, bad]), [0, 1])


class TestLossLos:
    def test_identity(self) -> None:
        assert loss_los(Tensor([2.0, 7.5]), [2.0, 7.5]).item() == 0.0

    def test_hand_value(self) -> None:
        value = loss_los(Tensor([math.e - 1.0]), [math.e**2 - 1.0]).item()
        assert value == pytest.approx(1.0)

    def test_not_scale_invariant(self) -> None:
        a = loss_los(Tensor([2.0]), [4.0]).item()
        b = loss_los(Tensor([20.0]), [40.0]).item()
        assert a != pytest.approx(b)

    def test_non_positive(self) -> None:
        with pytest.raises(DomainError):
            loss_los(Tensor([0.0]), [1.0])
        with pytest.raises(DomainError):
            loss_los(Tensor([1.0]), [-2.0])

    def test_shape_mismatch(self) -> None:
        with pytest.raises(DimensionError):
            loss_los(Tensor([1.0, 2.0]), [1.0])

    def test_gradient(self) -> None:
        p = Tensor([2.0, 5.0], requires_grad=True)
        y = np.array([3.0, 1.0])
        backward(loss_los(p, y))
        expected = 2.0 * (np.log1p(p.data) - np.log1p(y)) / (1.0 + p.data) / 2.0
        assert p.grad is not None
        np.testing.assert_allclose(p.grad, expected)


class TestJointLoss:
    def test_alpha_zero(self) -> None:
        y_hat, y_lstm = Tensor([2.0, 3.0]), Tensor([9.0, 9.0])
        assert joint_loss(y_hat, y_lstm, [2.5, 3.5], 0.0).item() == pytest.approx(
            loss_los(y_hat, [2.5, 3.5]).item()
        )

    def test_identical_heads(self) -> None:
        y_hat = Tensor([0.3, 0.8])
        single = loss_ihm(y_hat, [0, 1]).item()
        joint = joint_loss(y_hat, y_hat, [0, 1], 0.5, task="ihm").item()
        assert joint == pytest.approx(1.5 * single)

    def test_hand_sum(self) -> None:
        full = Tensor([los_prediction_with_loss(2.0, 0.2)])
        lstm = Tensor([los_prediction_with_loss(2.0, 0.3)])
        assert joint_loss(full, lstm, [2.0], 1.0).item() == pytest.approx(0.5)

    def test_affine_in_alpha(self) -> None:
        y_hat, y_lstm, y = Tensor([1.5, 4.0]), Tensor([2.0, 2.0]), [2.0, 3.0]
        values = [joint_loss(y_hat, y_lstm, y, a).item() for a in (0.0, 1.0, 2.5)]
        slope = values[1] - values[0]
        assert values[2] == pytest.approx(values[0] + 2.5 * slope)

    def test_negative_alpha(self) -> None:
        with pytest.raises(ConfigError):
            joint_loss(Tensor([1.0]), Tensor([1.0]), [1.0], -0.1)
