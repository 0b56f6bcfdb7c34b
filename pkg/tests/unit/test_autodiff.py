"""Tests for the tensor engine: forward values, gradients, tape misuse and Adam."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest

from mslesion.autodiff import ops
from mslesion.autodiff.optim import AdamState, adam_step
from mslesion.autodiff.tensor import RunningStats, Tape, Tensor, backward, gradients
from mslesion.exceptions import AutodiffError, ShapeMismatchError, TapeError

if TYPE_CHECKING:
    from collections.abc import Callable

EPS = 1e-6


def _weighted_sum(out: Tensor, seed: int = 99) -> Tensor:
    """Scalar loss with a fixed random weight per output element."""
    weights = np.random.default_rng(seed).normal(size=out.shape)
    return ops.sum_all(ops.mul(out, Tensor(weights)))


def check_gradients(fn: Callable[..., Tensor], *arrays: np.ndarray) -> None:
    """Compare tape gradients of ``fn`` with central finite differences (float64)."""
    tensors = [Tensor(a.copy(), requires_grad=True) for a in arrays]
    with Tape() as tape:
        loss = fn(*tensors)
    tape.backward(loss)

    for k, (t, a) in enumerate(zip(tensors, arrays, strict=True)):
        numeric = np.zeros_like(a)
        for idx in np.ndindex(a.shape):
            values = []
            for delta in (EPS, -EPS):
                shifted = [arr.copy() for arr in arrays]
                shifted[k][idx] += delta
                values.append(fn(*(Tensor(s) for s in shifted)).item())
            numeric[idx] = (values[0] - values[1]) / (2 * EPS)
        np.testing.assert_allclose(t.grad_or_zeros(), numeric, rtol=1e-4, atol=1e-6)


def _naive_conv(x: np.ndarray, w: np.ndarray, stride: int, padding: int) -> np.ndarray:
    n, c, h, wd = x.shape
    o, _, k, _ = w.shape
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    ho = (h + 2 * padding - k) // stride + 1
    wo = (wd + 2 * padding - k) // stride + 1
    out = np.zeros((n, o, ho, wo))
    for i in range(ho):
        for j in range(wo):
            patch = xp[:, :, i * stride:i * stride + k, j * stride:j * stride + k]
            out[:, :, i, j] = np.einsum("nchw,ochw->no", patch, w)
    return out


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


class TestForward:
    def test_conv2d_matches_direct_loops(self, rng: np.random.Generator):
        x = rng.normal(size=(2, 3, 7, 6))
        w = rng.normal(size=(4, 3, 3, 3))
        out = ops.conv2d(Tensor(x), Tensor(w), stride=2, padding=1)
        np.testing.assert_allclose(out.data, _naive_conv(x, w, 2, 1), rtol=1e-10)

    def test_conv2d_bias(self, rng: np.random.Generator):
        x = rng.normal(size=(1, 2, 4, 4))
        w = np.zeros((3, 2, 1, 1))
        out = ops.conv2d(Tensor(x), Tensor(w), Tensor(np.array([1.0, 2.0, 3.0])))
        assert out.shape == (1, 3, 4, 4)
        assert np.all(out.data[0, 2] == 3.0)

    def test_conv_transpose_doubles_resolution(self, rng: np.random.Generator):
        x = rng.normal(size=(2, 3, 4, 5))
        w = rng.normal(size=(3, 6, 2, 2))
        out = ops.conv_transpose2d(Tensor(x), Tensor(w))
        assert out.shape == (2, 6, 8, 10)
        expected = np.einsum("nc,co->no", x[:, :, 1, 2], w[:, :, 1, 0])
        np.testing.assert_allclose(out.data[:, :, 3, 4], expected)

    def test_maxpool_shapes_and_values(self):
        x = np.arange(16, dtype=np.float64).reshape(1, 1, 4, 4)
        out = ops.maxpool2d(Tensor(x), kernel=3, stride=2, padding=1)
        assert out.shape == (1, 1, 2, 2)
        np.testing.assert_array_equal(out.data[0, 0], [[5.0, 7.0], [13.0, 15.0]])

    def test_softmax_channels_sums_to_one(self, rng: np.random.Generator):
        out = ops.softmax_channels(Tensor(rng.normal(size=(2, 2, 3, 3)) * 50))
        np.testing.assert_allclose(out.data.sum(axis=1), 1.0)

    def test_batchnorm_training_normalises_and_updates_stats(self, rng: np.random.Generator):
        x = rng.normal(loc=3.0, scale=2.0, size=(4, 2, 5, 5))
        stats = RunningStats.fresh(2, np.float64)
        out = ops.batchnorm2d(
            Tensor(x), Tensor(np.ones(2)), Tensor(np.zeros(2)), stats, momentum=0.9, eps=0.0,
        )
        np.testing.assert_allclose(out.data.mean(axis=(0, 2, 3)), 0.0, atol=1e-12)
        np.testing.assert_allclose(out.data.std(axis=(0, 2, 3)), 1.0)
        np.testing.assert_allclose(stats.mean, 0.1 * x.mean(axis=(0, 2, 3)))
        np.testing.assert_allclose(stats.var, 0.9 + 0.1 * x.var(axis=(0, 2, 3)))

    def test_batchnorm_eval_uses_running_stats(self):
        x = np.full((1, 1, 2, 2), 5.0)
        stats = RunningStats(mean=np.array([1.0]), var=np.array([4.0]))
        out = ops.batchnorm2d(
            Tensor(x), Tensor(np.ones(1)), Tensor(np.zeros(1)), stats, training=False, eps=0.0,
        )
        np.testing.assert_allclose(out.data, 2.0)
        np.testing.assert_array_equal(stats.mean, [1.0])

    def test_fit_spatial_crops_centre_and_pads_bottom_right(self):
        x = np.arange(16, dtype=np.float64).reshape(1, 1, 4, 4)
        cropped = ops.fit_spatial(Tensor(x), 3, 3)
        np.testing.assert_array_equal(cropped.data[0, 0], x[0, 0, :3, :3])
        padded = ops.fit_spatial(Tensor(x), 5, 6)
        assert padded.shape == (1, 1, 5, 6)
        assert padded.data[0, 0, 4].sum() == 0.0
        np.testing.assert_array_equal(padded.data[0, 0, :4, :4], x[0, 0])


class TestGradients:
    def test_conv2d(self, rng: np.random.Generator):
        check_gradients(
            lambda x, w, b: _weighted_sum(ops.conv2d(x, w, b, stride=2, padding=1)),
            rng.normal(size=(2, 2, 5, 5)), rng.normal(size=(3, 2, 3, 3)), rng.normal(size=3),
        )

    def test_conv2d_strided_7x7(self, rng: np.random.Generator):
        check_gradients(
            lambda x, w: _weighted_sum(ops.conv2d(x, w, stride=2, padding=3)),
            rng.normal(size=(1, 1, 8, 8)), rng.normal(size=(2, 1, 7, 7)),
        )

    def test_conv_transpose2d(self, rng: np.random.Generator):
        check_gradients(
            lambda x, w, b: _weighted_sum(ops.conv_transpose2d(x, w, b)),
            rng.normal(size=(2, 2, 3, 3)), rng.normal(size=(2, 3, 2, 2)), rng.normal(size=3),
        )

    def test_batchnorm_training(self, rng: np.random.Generator):
        check_gradients(
            lambda x, g, b: _weighted_sum(ops.batchnorm2d(x, g, b, None, training=True)),
            rng.normal(size=(3, 2, 3, 3)), rng.normal(size=2), rng.normal(size=2),
        )

    def test_batchnorm_eval(self, rng: np.random.Generator):
        stats = RunningStats(mean=np.array([0.5, -1.0]), var=np.array([2.0, 0.5]))
        check_gradients(
            lambda x, g, b: _weighted_sum(ops.batchnorm2d(x, g, b, stats, training=False)),
            rng.normal(size=(2, 2, 3, 3)), rng.normal(size=2), rng.normal(size=2),
        )

    def test_relu_and_maxpool(self, rng: np.random.Generator):
        check_gradients(
            lambda x: _weighted_sum(ops.maxpool2d(ops.relu(x), kernel=3, stride=2, padding=1)),
            rng.normal(size=(2, 2, 6, 6)),
        )

    def test_softmax_channels(self, rng: np.random.Generator):
        check_gradients(
            lambda x: _weighted_sum(ops.softmax_channels(x)), rng.normal(size=(2, 2, 3, 3)),
        )

    def test_concat_take_and_add(self, rng: np.random.Generator):
        def fn(a: Tensor, b: Tensor) -> Tensor:
            joined = ops.concat_channels([a, b])
            return _weighted_sum(
                ops.add(ops.take_channels(joined, 1, 3), ops.take_channels(joined, 0, 2)),
            )

        check_gradients(fn, rng.normal(size=(1, 1, 3, 3)), rng.normal(size=(1, 2, 3, 3)))

    def test_fit_spatial(self, rng: np.random.Generator):
        check_gradients(
            lambda x: _weighted_sum(ops.fit_spatial(x, 3, 5)), rng.normal(size=(1, 2, 4, 4)),
        )

    def test_shared_tensor_accumulates(self):
        x = Tensor(np.array([[[[2.0]]]]), requires_grad=True)
        with Tape() as tape:
            loss = ops.sum_all(ops.add(ops.mul(x, x), x))
        tape.backward(loss)
        np.testing.assert_allclose(x.grad, [[[[5.0]]]])


class TestTape:
    def test_ops_outside_tape_are_not_recorded(self):
        x = Tensor(np.ones((1, 1, 2, 2)), requires_grad=True)
        y = ops.relu(x)
        assert y.tape is None
        with pytest.raises(TapeError, match="inside a Tape"):
            backward(ops.sum_all(y))

    def test_backward_twice(self):
        x = Tensor(np.ones((1, 1, 2, 2)), requires_grad=True)
        with Tape() as tape:
            loss = ops.sum_all(x)
        tape.backward(loss)
        with pytest.raises(TapeError, match="already ran"):
            tape.backward(loss)

    def test_recording_after_backward(self):
        x = Tensor(np.ones((1, 1, 2, 2)), requires_grad=True)
        tape = Tape()
        with tape:
            loss = ops.sum_all(x)
        tape.backward(loss)
        with tape, pytest.raises(TapeError, match="already been differentiated"):
            ops.relu(x)

    def test_reset_allows_reuse(self):
        x = Tensor(np.ones((1, 1, 2, 2)), requires_grad=True)
        tape = Tape()
        with tape:
            tape.backward(ops.sum_all(x))
        tape.reset()
        assert len(tape) == 0
        with tape:
            loss = ops.sum_all(ops.mul(x, x))
        tape.backward(loss)
        np.testing.assert_allclose(x.grad, 2.0)

    def test_non_scalar_loss(self):
        x = Tensor(np.ones((1, 1, 2, 2)), requires_grad=True)
        with Tape() as tape:
            y = ops.relu(x)
        with pytest.raises(TapeError, match="scalar"):
            tape.backward(y)

    def test_loss_from_another_tape(self):
        x = Tensor(np.ones((1, 1, 2, 2)), requires_grad=True)
        with Tape():
            loss = ops.sum_all(x)
        with pytest.raises(TapeError, match="not produced on this tape"):
            Tape().backward(loss)

    def test_gradients_of_unreached_tensor_are_zero(self):
        x = Tensor(np.ones((1, 1, 2, 2)), requires_grad=True)
        unused = Tensor(np.ones(3), requires_grad=True)
        with Tape():
            loss = ops.sum_all(x)
        gx, gu = gradients(loss, [x, unused])
        np.testing.assert_array_equal(gx, np.ones((1, 1, 2, 2)))
        np.testing.assert_array_equal(gu, np.zeros(3))

    def test_item_requires_single_element(self):
        with pytest.raises(TapeError):
            Tensor(np.ones(2)).item()


class TestShapeErrors:
    def test_conv_channel_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            ops.conv2d(Tensor(np.ones((1, 2, 4, 4))), Tensor(np.ones((1, 3, 3, 3))))

    def test_conv_requires_nchw(self):
        with pytest.raises(ShapeMismatchError, match="NCHW"):
            ops.conv2d(Tensor(np.ones((2, 4, 4))), Tensor(np.ones((1, 2, 3, 3))))

    def test_upconv_kernel_must_equal_stride(self):
        with pytest.raises(AutodiffError):
            ops.conv_transpose2d(Tensor(np.ones((1, 1, 2, 2))), Tensor(np.ones((1, 1, 3, 3))))

    def test_eval_batchnorm_needs_stats(self):
        with pytest.raises(AutodiffError, match="running statistics"):
            ops.batchnorm2d(
                Tensor(np.ones((1, 1, 2, 2))), Tensor(np.ones(1)), Tensor(np.zeros(1)),
                training=False,
            )

    def test_add_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            ops.add(Tensor(np.ones((1, 1, 2, 2))), Tensor(np.ones((1, 1, 2, 3))))

    def test_concat_spatial_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            ops.concat_channels([Tensor(np.ones((1, 1, 2, 2))), Tensor(np.ones((1, 1, 3, 3)))])


class TestAdam:
    def test_first_step_moves_by_lr_times_sign(self):
        p = Tensor(np.array([1.0, -2.0]), requires_grad=True)
        state = adam_step({"p": p}, {"p": np.array([0.5, -3.0])}, AdamState(), lr=0.1)
        assert state.step == 1
        np.testing.assert_allclose(p.data, [0.9, -1.9], atol=1e-6)

    def test_missing_gradient_leaves_parameter(self):
        p = Tensor(np.array([1.0, 2.0]), requires_grad=True)
        adam_step({"p": p}, {}, AdamState(), lr=0.1)
        np.testing.assert_array_equal(p.data, [1.0, 2.0])

    def test_bias_correction_on_second_step(self):
        p = Tensor(np.array([0.0]), requires_grad=True)
        state = AdamState()
        adam_step({"p": p}, {"p": np.array([1.0])}, state, lr=1.0)
        adam_step({"p": p}, {"p": np.array([1.0])}, state, lr=1.0)
        np.testing.assert_allclose(p.data, [-2.0], atol=1e-6)

    def test_gradient_shape_mismatch(self):
        p = Tensor(np.zeros(2), requires_grad=True)
        with pytest.raises(ShapeMismatchError):
            adam_step({"p": p}, {"p": np.zeros(3)}, AdamState(), lr=0.1)

    def test_preserves_dtype(self):
        p = Tensor(np.zeros(2, dtype=np.float32), requires_grad=True)
        adam_step({"p": p}, {"p": np.ones(2)}, AdamState(), lr=0.1)
        assert p.dtype == np.float32
