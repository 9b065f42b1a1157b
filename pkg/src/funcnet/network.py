"""Dense feedforward network: forward pass, backprop, Adam training.

Everything is plain float64 numpy. A network is a list of
:class:`LayerParams`; training is deterministic for a fixed seed.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-7
IMPROVEMENT_THRESHOLD = 1e-7

ACTIVATIONS = ("relu", "sigmoid", "tanh", "linear", "softmax")
LOSSES = ("mse", "categorical_cross_entropy")


@dataclass(frozen=True)
class LayerSpec:
    units: int
    activation: str = "relu"
    dropout_rate: float = 0.0

    def __post_init__(self):
        if self.units < 1:
            raise ValidationError("layer units must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValidationError(f"unknown activation {self.activation!r}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValidationError("dropout_rate must lie in [0, 1)")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    learn_rate: float = 0.001
    decay_rate: float = 0.0
    validation_split: float = 0.2
    early_stopping: bool = False
    patience: int = 15
    seed: int = 0
    loss: str = "mse"

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.patience < 1:
            raise ValidationError("epochs, batch_size and patience must be >= 1")
        if self.learn_rate <= 0 or self.decay_rate < 0:
            raise ValidationError("learn_rate must be > 0 and decay_rate >= 0")
        if not 0.0 <= self.validation_split < 1.0:
            raise ValidationError("validation_split must lie in [0, 1)")
        if self.loss not in LOSSES:
            raise ValidationError(f"unknown loss {self.loss!r}")


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    stopped_epoch: int = 0
    # recorded alongside cross-entropy so error plots can show MSE too
    train_mse: list = field(default_factory=list)


@dataclass
class LayerParams:
    weights: np.ndarray  # fan_in x units
    bias: np.ndarray  # units
    activation: str
    dropout_rate: float = 0.0

    @property
    def n_params(self) -> int:
        return self.weights.size + self.bias.size


def _activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    if name == "tanh":
        return np.tanh(z)
    if name == "linear":
        return z
    # softmax, stabilized
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _activation_grad(name: str, a: np.ndarray) -> np.ndarray:
    """d(activation)/d(preactivation) expressed through the activation value."""
    if name == "relu":
        return (a > 0.0).astype(float)
    if name == "sigmoid":
        return a * (1.0 - a)
    if name == "tanh":
        return 1.0 - a * a
    if name == "linear":
        return np.ones_like(a)
    raise ValidationError(
        "softmax gradients are only available fused with cross-entropy"
    )


def init_params(specs: list[LayerSpec], fan_in: int, seed) -> list[LayerParams]:
    """Glorot-uniform weights, zero biases."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    layers = []
    for spec in specs:
        limit = np.sqrt(6.0 / (fan_in + spec.units))
        weights = rng.uniform(-limit, limit, size=(fan_in, spec.units))
        layers.append(
            LayerParams(weights, np.zeros(spec.units), spec.activation,
                        spec.dropout_rate)
        )
        fan_in = spec.units
    return layers


def _forward_cached(layers, x, masks=None):
    """Forward pass keeping every layer's activation (training internals)."""
    activations = [x]
    for i, layer in enumerate(layers):
        z = activations[-1] @ layer.weights + layer.bias
        a = _activate(layer.activation, z)
        if masks is not None and masks[i] is not None:
            a = a * masks[i]
        activations.append(a)
    return activations


def forward(layers: list[LayerParams], x) -> np.ndarray:
    """Inference-mode forward pass (dropout inactive)."""
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    out = _forward_cached(layers, np.atleast_2d(x))[-1]
    return out[0] if squeeze else out


def loss_value(loss: str, pred: np.ndarray, target: np.ndarray) -> float:
    if pred.shape != target.shape:
        raise ValidationError(
            f"prediction shape {pred.shape} != target shape {target.shape}"
        )
    if loss == "mse":
        return float(np.mean((pred - target) ** 2))
    p = np.clip(pred, 1e-300, None)
    return float(-np.sum(target * np.log(p)) / pred.shape[0])


def backward(layers, x, target, loss: str, masks=None):
    """Analytic gradients of the loss for every weight matrix and bias.

    Softmax outputs are fused with cross-entropy; other activations pair
    with either loss.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    target = np.atleast_2d(np.asarray(target, dtype=float))
    out_act = layers[-1].activation
    if (out_act == "softmax") != (loss == "categorical_cross_entropy"):
        raise ValidationError(
            "softmax and categorical_cross_entropy must be used together"
        )
    activations = _forward_cached(layers, x, masks)
    pred = activations[-1]
    batch = x.shape[0]
    if loss == "mse":
        delta = 2.0 * (pred - target) / pred.size
        delta = delta * _activation_grad(out_act, pred)
    else:
        delta = (pred - target) / batch  # fused softmax + cross-entropy
    grads = [None] * len(layers)
    for i in range(len(layers) - 1, -1, -1):
        grads[i] = (activations[i].T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = delta @ layers[i].weights.T
            if masks is not None and masks[i - 1] is not None:
                delta = delta * masks[i - 1]
            delta = delta * _activation_grad(
                layers[i - 1].activation, activations[i]
            )
    return grads


def train(specs: list[LayerSpec], config: TrainConfig, X, Y):
    """Mini-batch Adam with learning-rate decay and early stopping.

    Validation rows are the contiguous tail fraction and never enter the
    updates. Returns (layers, TrainHistory).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[0] != X.shape[0]:
        raise ValidationError("X and Y row counts differ")
    n = X.shape[0]
    if n < 2:
        raise ValidationError("training needs at least 2 observations")
    n_val = int(round(n * config.validation_split)) if config.validation_split > 0 else 0
    if config.validation_split > 0 and (n_val == 0 or n_val == n):
        raise ValidationError(
            f"validation split {config.validation_split} leaves an empty "
            f"partition for n={n}"
        )
    if config.early_stopping and n_val == 0:
        raise ValidationError("early stopping requires a validation split > 0")
    n_train = n - n_val
    X_tr, Y_tr = X[:n_train], Y[:n_train]
    X_val, Y_val = X[n_train:], Y[n_train:]

    rng = np.random.default_rng(config.seed)
    layers = init_params(specs, X.shape[1], rng)
    m_state = [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in layers]
    v_state = [(np.zeros_like(l.weights), np.zeros_like(l.bias)) for l in layers]
    step = 0

    history = TrainHistory()
    best_val = np.inf
    best_layers = None
    wait = 0

    has_dropout = any(s.dropout_rate > 0 for s in specs[:-1])
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n_train)
        for start in range(0, n_train, config.batch_size):
            idx = order[start:start + config.batch_size]
            xb, yb = X_tr[idx], Y_tr[idx]
            masks = None
            if has_dropout:
                masks = []
                for i, spec in enumerate(specs):
                    rate = spec.dropout_rate
                    if rate > 0 and i < len(specs) - 1:
                        keep = rng.random((xb.shape[0], spec.units)) >= rate
                        masks.append(keep / (1.0 - rate))
                    else:
                        masks.append(None)
            grads = backward(layers, xb, yb, config.loss, masks)
            lr = config.learn_rate / (1.0 + config.decay_rate * step)
            step += 1
            for layer, grad, ms, vs in zip(layers, grads, m_state, v_state):
                for value, g, m, v in zip(
                    (layer.weights, layer.bias), grad, ms, vs
                ):
                    m *= ADAM_BETA1
                    m += (1 - ADAM_BETA1) * g
                    v *= ADAM_BETA2
                    v += (1 - ADAM_BETA2) * g * g
                    m_hat = m / (1 - ADAM_BETA1 ** step)
                    v_hat = v / (1 - ADAM_BETA2 ** step)
                    value -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)

        pred_tr = forward(layers, X_tr)
        train_loss = loss_value(config.loss, pred_tr, Y_tr)
        if not np.isfinite(train_loss):
            raise NumericalError(f"training diverged at epoch {epoch}")
        history.train_loss.append(train_loss)
        if config.loss == "categorical_cross_entropy":
            history.train_mse.append(float(np.mean((pred_tr - Y_tr) ** 2)))
        history.stopped_epoch = epoch

        if n_val > 0:
            val_loss = loss_value(config.loss, forward(layers, X_val), Y_val)
            if not np.isfinite(val_loss):
                raise NumericalError(f"training diverged at epoch {epoch}")
            history.val_loss.append(val_loss)
            if val_loss < best_val - IMPROVEMENT_THRESHOLD:
                best_val = val_loss
                best_layers = copy.deepcopy(layers)
                wait = 0
            else:
                wait += 1
                if config.early_stopping and wait >= config.patience:
                    break

    if config.early_stopping and best_layers is not None:
        layers = best_layers
    return layers, history
