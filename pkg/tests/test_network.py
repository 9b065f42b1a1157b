"""Tests for the dense network core: forward, backprop, Adam, stopping."""

import numpy as np
import pytest

from funcnet import LayerSpec, NumericalError, TrainConfig, ValidationError
from funcnet.network import (
    LayerParams,
    backward,
    forward,
    init_params,
    loss_value,
    train,
)


def finite_difference_grads(layers, x, y, loss, h=1e-5):
    grads = []
    for layer in layers:
        pair = []
        for arr in (layer.weights, layer.bias):
            g = np.zeros_like(arr)
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + h
                up = loss_value(loss, np.atleast_2d(forward(layers, x)), y)
                arr[idx] = orig - h
                down = loss_value(loss, np.atleast_2d(forward(layers, x)), y)
                arr[idx] = orig
                g[idx] = (up - down) / (2 * h)
            pair.append(g)
        grads.append(tuple(pair))
    return grads


def max_grad_error(analytic, numeric):
    worst = 0.0
    for (aw, ab), (nw, nb) in zip(analytic, numeric):
        for a, n in ((aw, nw), (ab, nb)):
            denom = np.maximum.reduce([np.abs(a), np.abs(n), np.full_like(a, 1e-8)])
            worst = max(worst, np.max(np.abs(a - n) / denom))
    return worst


class TestForward:
    def test_zero_network(self):
        layers = [
            LayerParams(np.zeros((3, 2)), np.zeros(2), "linear"),
            LayerParams(np.zeros((2, 1)), np.zeros(1), "linear"),
        ]
        np.testing.assert_array_equal(forward(layers, np.ones(3)), 0.0)

    def test_relu_identity_layer(self):
        layers = [LayerParams(np.eye(2), np.zeros(2), "relu")]
        np.testing.assert_array_equal(
            forward(layers, np.array([-1.0, 2.0])), [0.0, 2.0]
        )

    def test_two_layer_hand_computation(self):
        w1 = np.array([[1.0, -2.0], [0.5, 1.0]])
        b1 = np.array([0.25, -0.5])
        w2 = np.array([[2.0], [-1.0]])
        b2 = np.array([0.1])
        layers = [
            LayerParams(w1, b1, "tanh"),
            LayerParams(w2, b2, "linear"),
        ]
        x = np.array([0.3, -0.7])
        hidden = np.tanh(x @ w1 + b1)
        expected = hidden @ w2 + b2
        np.testing.assert_allclose(forward(layers, x), expected, atol=1e-12)

    def test_dimension_mismatch(self):
        layers = [LayerParams(np.zeros((3, 2)), np.zeros(2), "linear")]
        with pytest.raises(ValueError):
            forward(layers, np.ones(4))

    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(0)
        layers = init_params([LayerSpec(4, "softmax")], 3, 1)
        out = forward(layers, rng.normal(size=(20, 3)) * 10)
        assert np.all(out >= 0)
        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-12)


class TestBackward:
    def test_zero_residual_mse(self):
        layers = [LayerParams(np.array([[2.0]]), np.array([1.0]), "linear")]
        x = np.array([[3.0]])
        y = np.array([[7.0]])  # prediction equals target
        grads = backward(layers, x, y, "mse")
        np.testing.assert_array_equal(grads[0][0], 0.0)
        np.testing.assert_array_equal(grads[0][1], 0.0)

    def test_single_linear_neuron_closed_form(self):
        w, b, x, y = 1.5, -0.25, 2.0, 4.0
        layers = [LayerParams(np.array([[w]]), np.array([b]), "linear")]
        grads = backward(layers, [[x]], [[y]], "mse")
        assert grads[0][0][0, 0] == pytest.approx(2 * (w * x + b - y) * x)
        assert grads[0][1][0] == pytest.approx(2 * (w * x + b - y))

    def test_three_layer_finite_difference(self):
        rng = np.random.default_rng(42)
        specs = [LayerSpec(6, "tanh"), LayerSpec(5, "relu"), LayerSpec(2, "linear")]
        layers = init_params(specs, 4, 7)
        x = rng.normal(size=(5, 4))
        y = rng.normal(size=(5, 2))
        analytic = backward(layers, x, y, "mse")
        numeric = finite_difference_grads(layers, x, y, "mse")
        assert max_grad_error(analytic, numeric) < 1e-5

    def test_softmax_requires_cross_entropy(self):
        layers = init_params([LayerSpec(3, "softmax")], 2, 0)
        with pytest.raises(ValidationError):
            backward(layers, np.ones((1, 2)), np.ones((1, 3)) / 3, "mse")

    def test_gradient_check_random_architectures(self):
        # 1-3 layers, mixed activations, both losses
        rng = np.random.default_rng(2024)
        for trial in range(20):
            depth = int(rng.integers(1, 4))
            loss = "mse" if trial % 2 == 0 else "categorical_cross_entropy"
            specs = [
                LayerSpec(
                    int(rng.integers(2, 7)),
                    str(rng.choice(["relu", "sigmoid", "tanh"])),
                )
                for _ in range(depth - 1)
            ]
            out_units = int(rng.integers(2, 5))
            out_act = "softmax" if loss == "categorical_cross_entropy" else "linear"
            specs.append(LayerSpec(out_units, out_act))
            fan_in = int(rng.integers(2, 6))
            layers = init_params(specs, fan_in, int(rng.integers(0, 1000)))
            x = rng.normal(size=(4, fan_in))
            if loss == "mse":
                y = rng.normal(size=(4, out_units))
            else:
                y = np.eye(out_units)[rng.integers(0, out_units, 4)]
            analytic = backward(layers, x, y, loss)
            numeric = finite_difference_grads(layers, x, y, loss)
            assert max_grad_error(analytic, numeric) < 1e-5, f"trial {trial}"


class TestInitParams:
    def test_same_seed_identical(self):
        specs = [LayerSpec(8, "relu"), LayerSpec(3, "linear")]
        a = init_params(specs, 5, 99)
        b = init_params(specs, 5, 99)
        for la, lb in zip(a, b):
            np.testing.assert_array_equal(la.weights, lb.weights)

    def test_biases_zero(self):
        for layer in init_params([LayerSpec(6, "relu")], 4, 0):
            np.testing.assert_array_equal(layer.bias, 0.0)

    def test_glorot_variance(self):
        # 64x8 layer: empirical variance within 10% of 2 / (8 + 64)
        samples = np.concatenate(
            [
                init_params([LayerSpec(64, "relu")], 8, seed)[0].weights.ravel()
                for seed in range(100)
            ]
        )
        target = 2.0 / (8 + 64)
        assert abs(samples.var() - target) / target < 0.1


class TestTrain:
    def test_recovers_linear_map(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-1, 1, size=(64, 1))
        y = 3.0 * x + 1.0
        cfg = TrainConfig(
            epochs=500, learn_rate=0.05, validation_split=0.0, seed=1
        )
        layers, _ = train([LayerSpec(1, "linear")], cfg, x, y)
        assert layers[0].weights[0, 0] == pytest.approx(3.0, abs=0.05)
        assert layers[0].bias[0] == pytest.approx(1.0, abs=0.05)

    def test_patience_one_stops_at_epoch_two(self):
        x = np.ones((10, 1))
        y = np.ones((10, 1))
        cfg = TrainConfig(
            epochs=50,
            learn_rate=1e-30,  # effectively frozen: val loss cannot improve
            validation_split=0.2,
            early_stopping=True,
            patience=1,
            seed=0,
        )
        _, history = train([LayerSpec(1, "linear")], cfg, x, y)
        assert history.stopped_epoch == 2

    def test_fixed_seed_is_bitwise_deterministic(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(30, 3))
        y = rng.normal(size=(30, 1))
        cfg = TrainConfig(epochs=20, validation_split=0.25, seed=123)
        specs = [LayerSpec(4, "relu", dropout_rate=0.3), LayerSpec(1, "linear")]
        a, _ = train(specs, cfg, x, y)
        b, _ = train(specs, cfg, x, y)
        for la, lb in zip(a, b):
            np.testing.assert_array_equal(la.weights, lb.weights)
            np.testing.assert_array_equal(la.bias, lb.bias)

    def test_monotone_loss_on_noiseless_linear_data(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(50, 2))
        y = x @ np.array([[1.5], [-2.0]]) + 0.5
        cfg = TrainConfig(
            epochs=60, learn_rate=1e-3, validation_split=0.0,
            batch_size=50, seed=0,
        )
        _, history = train([LayerSpec(1, "linear")], cfg, x, y)
        losses = history.train_loss
        assert all(
            losses[i + 1] <= losses[i] + 1e-12 for i in range(5, len(losses) - 1)
        )

    def test_early_stopping_returns_best_epoch(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(40, 2))
        y = rng.normal(size=(40, 1))
        cfg = TrainConfig(
            epochs=80, learn_rate=0.05, validation_split=0.25,
            early_stopping=True, patience=5, seed=4,
        )
        layers, history = train(
            [LayerSpec(8, "tanh"), LayerSpec(1, "linear")], cfg, x, y
        )
        n_val = 10
        pred = forward(layers, x[-n_val:])
        final_val = loss_value("mse", pred, y[-n_val:])
        assert final_val <= min(history.val_loss) + 1e-12

    def test_history_lengths_match_stopped_epoch(self):
        x = np.linspace(0, 1, 20)[:, None]
        y = 2 * x
        cfg = TrainConfig(epochs=7, validation_split=0.2, seed=0)
        _, history = train([LayerSpec(1, "linear")], cfg, x, y)
        assert history.stopped_epoch == 7
        assert len(history.train_loss) == 7
        assert len(history.val_loss) == 7

    def test_divergence_reported_with_epoch(self):
        x = np.array([[1e200], [-1e200], [1e200], [-1e200]])
        y = np.array([[1.0], [2.0], [3.0], [4.0]])
        cfg = TrainConfig(epochs=5, learn_rate=0.1, validation_split=0.0, seed=0)
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(NumericalError, match="epoch"):
                train([LayerSpec(1, "linear")], cfg, x, y)

    def test_empty_partition_rejected(self):
        x = np.ones((3, 1))
        y = np.ones((3, 1))
        cfg = TrainConfig(epochs=1, validation_split=0.05, seed=0)
        with pytest.raises(ValidationError):
            train([LayerSpec(1, "linear")], cfg, x, y)

    def test_early_stopping_needs_validation(self):
        cfg = TrainConfig(
            epochs=1, validation_split=0.0, early_stopping=True, seed=0
        )
        with pytest.raises(ValidationError):
            train([LayerSpec(1, "linear")], cfg, np.ones((4, 1)), np.ones((4, 1)))
