"""
nn_core Service Tests
=====================

Unit tests for init_network, forward/backward, MSE and Adam.
"""

import numpy as np
import pytest

from src.services.nn_core import (
    AdamConfig,
    DenseSpec,
    Gradients,
    NetworkSpec,
    ShapeMismatchError,
    StaleCacheError,
    adam_step,
    backward,
    forward,
    init_network,
    mse_loss,
    mse_loss_grad,
    predict,
)


def _dense(i: int, o: int) -> NetworkSpec:
    return NetworkSpec(layers=[DenseSpec(in_units=i, out_units=o)], input_shape=(i,))


class TestInitNetwork:
    """Tests for init_network."""

    def test_same_seed_same_params(self, tiny_encoder):
        """Test initialization is a pure function of the seed."""
        a = init_network(tiny_encoder, seed=7)
        b = init_network(tiny_encoder, seed=7)
        for x, y in zip(a.parameter_arrays(), b.parameter_arrays()):
            np.testing.assert_array_equal(x, y)

    def test_biases_start_at_zero(self, tiny_encoder):
        """Test both schemes zero the biases."""
        for scheme in ("paper_normal", "scaled"):
            net = init_network(tiny_encoder, scheme=scheme, seed=0)
            assert all(np.all(p["bias"] == 0) for p in net.params if p)

    def test_scaled_shrinks_weights(self):
        """Test the scaled scheme multiplies by sqrt(2 / fan_in)."""
        spec = _dense(50, 3)
        plain = init_network(spec, scheme="paper_normal", seed=3)
        scaled = init_network(spec, scheme="scaled", seed=3)
        np.testing.assert_allclose(
            scaled.params[0]["weight"], plain.params[0]["weight"] * np.sqrt(2.0 / 50)
        )

    def test_parameterless_layers_hold_nothing(self, tiny_encoder):
        """Test activations get an empty parameter dict."""
        net = init_network(tiny_encoder, seed=0)
        assert net.params[1] == {}
        assert net.params[0]["weight"].shape == (3, 4)

    def test_adam_state_zeroed(self, tiny_encoder):
        """Test Adam moments start at zero with step 0."""
        net = init_network(tiny_encoder, seed=0)
        assert net.adam_state.step == 0
        assert np.all(net.adam_state.m[0]["weight"] == 0)

    def test_unknown_scheme(self, tiny_encoder):
        """Test unknown init schemes are rejected."""
        with pytest.raises(ValueError):
            init_network(tiny_encoder, scheme="xavier")


class TestForward:
    """Tests for forward and predict."""

    def test_dense_affine(self):
        """Test a dense layer computes W x + b."""
        net = init_network(_dense(3, 2), seed=0)
        net.params[0]["bias"][...] = [1.0, -1.0]
        x = np.array([0.5, -0.25, 2.0])
        expected = net.params[0]["weight"] @ x + net.params[0]["bias"]
        np.testing.assert_allclose(predict(net, x), expected)

    def test_unbatched_stays_unbatched(self, tiny_encoder):
        """Test a single sample returns a single output."""
        net = init_network(tiny_encoder, seed=0)
        assert predict(net, np.zeros(4)).shape == (2,)
        assert predict(net, np.zeros((5, 4))).shape == (5, 2)

    def test_batch_rows_independent(self, tiny_encoder, tiny_data):
        """Test batched output equals per-sample outputs."""
        net = init_network(tiny_encoder, seed=0)
        batched = predict(net, tiny_data[:3])
        for i in range(3):
            np.testing.assert_allclose(batched[i], predict(net, tiny_data[i]))

    def test_wrong_shape(self, tiny_encoder):
        """Test inputs of the wrong shape are rejected."""
        net = init_network(tiny_encoder, seed=0)
        with pytest.raises(ShapeMismatchError):
            predict(net, np.zeros(5))


class TestBackward:
    """Tests for backward."""

    def test_dense_gradients(self):
        """Test dense gradients against the closed form."""
        net = init_network(_dense(3, 2), seed=0)
        x = np.array([[1.0, 2.0, 3.0]])
        g = np.array([[0.5, -1.0]])
        _, cache = forward(net, x)
        grads = backward(net, cache, g)
        np.testing.assert_allclose(grads.params[0]["weight"], g.T @ x)
        np.testing.assert_allclose(grads.params[0]["bias"], g[0])
        np.testing.assert_allclose(grads.input_grad, g @ net.params[0]["weight"])

    def test_stale_cache_after_update(self, tiny_encoder, tiny_data):
        """Test a cache from before an Adam step is rejected."""
        net = init_network(tiny_encoder, seed=0)
        y, cache = forward(net, tiny_data)
        grads = backward(net, cache, np.ones_like(y))
        adam_step(net, grads, AdamConfig())
        with pytest.raises(StaleCacheError):
            backward(net, cache, np.ones_like(y))

    def test_cache_from_other_network(self, tiny_encoder, tiny_data):
        """Test a cache from a clone is rejected."""
        net = init_network(tiny_encoder, seed=0)
        twin = net.clone()
        y, cache = forward(net, tiny_data)
        with pytest.raises(StaleCacheError):
            backward(twin, cache, np.ones_like(y))

    def test_gradient_shape_mismatch(self, tiny_encoder, tiny_data):
        """Test a loss gradient of the wrong shape is rejected."""
        net = init_network(tiny_encoder, seed=0)
        _, cache = forward(net, tiny_data)
        with pytest.raises(ShapeMismatchError):
            backward(net, cache, np.ones((len(tiny_data), 3)))


class TestMseLoss:
    """Tests for mse_loss and mse_loss_grad."""

    def test_unit_distance(self):
        """Test mse([0,0],[1,1]) is 1."""
        assert mse_loss(np.array([0.0, 0.0]), np.array([1.0, 1.0])) == 1.0

    def test_identical_is_zero(self, tiny_data):
        """Test identical arrays have zero loss."""
        assert mse_loss(tiny_data, tiny_data) == 0.0

    def test_gradient(self):
        """Test the gradient is 2(y - x) / size."""
        x = np.zeros((2, 2))
        y = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_allclose(mse_loss_grad(x, y), 2.0 * y / 4)

    def test_shape_mismatch(self):
        """Test differently shaped operands are rejected."""
        with pytest.raises(ShapeMismatchError):
            mse_loss(np.zeros(2), np.zeros(3))


class TestAdamStep:
    """Tests for adam_step."""

    def test_first_step_moves_by_learning_rate(self):
        """Test the first bias-corrected step is lr times the gradient sign."""
        net = init_network(_dense(2, 1), seed=0)
        before = net.params[0]["weight"].copy()
        grads = Gradients(
            params=[{"weight": np.array([[3.0, -0.5]]), "bias": np.array([2.0])}],
            input_grad=np.zeros(2),
        )
        adam_step(net, grads, AdamConfig(learning_rate=0.01))
        np.testing.assert_allclose(
            net.params[0]["weight"] - before, [[-0.01, 0.01]], rtol=1e-6
        )
        np.testing.assert_allclose(net.params[0]["bias"], [-0.01], rtol=1e-6)

    def test_counters_increment(self, tiny_encoder, tiny_data):
        """Test the step counter and version both advance."""
        net = init_network(tiny_encoder, seed=0)
        y, cache = forward(net, tiny_data)
        adam_step(net, backward(net, cache, mse_loss_grad(np.zeros_like(y), y)), AdamConfig())
        assert net.adam_state.step == 1
        assert net.version == 1

    def test_descends_loss(self, tiny_encoder, tiny_data):
        """Test repeated steps on a fixed batch reduce the loss."""
        net = init_network(tiny_encoder, scheme="scaled", seed=0)
        target = np.zeros((len(tiny_data), 2))
        start = mse_loss(target, predict(net, tiny_data))
        for _ in range(50):
            y, cache = forward(net, tiny_data)
            adam_step(net, backward(net, cache, mse_loss_grad(target, y)), AdamConfig())
        assert mse_loss(target, predict(net, tiny_data)) < start

    def test_gradient_shape_mismatch(self):
        """Test gradients that do not match the parameters are rejected."""
        net = init_network(_dense(2, 1), seed=0)
        grads = Gradients(params=[{"weight": np.zeros((2, 2))}], input_grad=np.zeros(2))
        with pytest.raises(ShapeMismatchError):
            adam_step(net, grads, AdamConfig())
