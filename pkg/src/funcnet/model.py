"""The functional neural network: fit, predict, and weight extraction.

Curves are reduced to integral features against per-covariate weight
bases, standardized, and fed to the dense network. The trained first
layer, averaged across its units and mapped back to the original feature
scale, gives the functional weight curve for each covariate.
"""

from __future__ import annotations

import sys
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import network as net
from .basis import (
    BasisSystem,
    FunctionalDataSet,
    RawCurves,
    basis_eval,
    bspline_basis,
    fourier_basis,
    smooth_raw_covariates,
)
from .errors import ValidationError
from .network import LayerSpec, TrainConfig, TrainHistory
from .quadrature import (
    DEFAULT_QUAD_POINTS,
    DesignMatrix,
    integral_features,
    standardize,
)

DEFAULT_WEIGHT_BASIS_SIZE = 7
DEFAULT_HIDDEN = (LayerSpec(64, "relu"), LayerSpec(64, "relu"))

RESPONSE_MODES = ("regression", "classification", "functional")


def _broadcast(values, count, what):
    values = list(values)
    if len(values) == count:
        return values
    if len(values) == 1 and count > 1:
        warnings.warn(
            f"only one {what} specified; it will be repeated for all "
            f"{count} entries",
            stacklevel=3,
        )
        return values * count
    raise ValidationError(
        f"expected {count} {what} entries, got {len(values)}"
    )


@dataclass(frozen=True)
class FnnConfig:
    """Everything needed to build and train a functional network."""

    domain_ranges: tuple
    weight_bases: tuple
    hidden: tuple = DEFAULT_HIDDEN
    response_mode: str = "regression"
    train: TrainConfig = field(default_factory=TrainConfig)
    raw_data: bool = False
    quad_points: int = DEFAULT_QUAD_POINTS

    def __post_init__(self):
        if self.response_mode not in RESPONSE_MODES:
            raise ValidationError(
                f"unknown response mode {self.response_mode!r}"
            )
        if len(self.weight_bases) != len(self.domain_ranges):
            raise ValidationError(
                "weight_bases and domain_ranges lengths differ"
            )
        for spec in self.hidden:
            if spec.activation == "softmax":
                raise ValidationError("softmax is only valid on the output layer")

    @classmethod
    def build(
        cls,
        domain_ranges,
        basis_kinds=("fourier",),
        num_basis=(DEFAULT_WEIGHT_BASIS_SIZE,),
        hidden_layers=2,
        neurons=(64, 64),
        activations=("relu", "relu"),
        dropout=0.0,
        bspline_order=4,
        response_mode="regression",
        train: TrainConfig | None = None,
        raw_data=False,
        quad_points=DEFAULT_QUAD_POINTS,
    ) -> "FnnConfig":
        """Assemble a config from flat options, broadcasting length-1 lists."""
        domain_ranges = [tuple(map(float, d)) for d in domain_ranges]
        k = len(domain_ranges)
        kinds = _broadcast(basis_kinds, k, "weight basis kind")
        sizes = _broadcast(num_basis, k, "weight basis size")
        bases = []
        for kind, size, dom in zip(kinds, sizes, domain_ranges):
            if kind == "fourier":
                bases.append(fourier_basis(size, dom))
            else:
                bases.append(bspline_basis(size, dom, order=bspline_order))
        units = _broadcast(neurons, hidden_layers, "neurons-per-layer")
        acts = _broadcast(activations, hidden_layers, "activation")
        hidden = tuple(
            LayerSpec(int(u), a, dropout) for u, a in zip(units, acts)
        )
        return cls(
            domain_ranges=tuple(domain_ranges),
            weight_bases=tuple(bases),
            hidden=hidden,
            response_mode=response_mode,
            train=train if train is not None else TrainConfig(),
            raw_data=raw_data,
            quad_points=quad_points,
        )


@dataclass(frozen=True)
class FunctionalWeight:
    """Averaged, de-standardized first-layer coefficients for one covariate."""

    covariate: int
    basis: BasisSystem
    coefficients: np.ndarray

    def eval(self, t) -> np.ndarray:
        return basis_eval(self.basis, t) @ self.coefficients


@dataclass
class FnnModel:
    config: FnnConfig
    design: DesignMatrix
    layers: list
    history: TrainHistory
    response_meta: dict
    smoothed_data: FunctionalDataSet | None = None
    smoothing_bases: tuple | None = None

    @property
    def n_params(self) -> int:
        return sum(layer.n_params for layer in self.layers)


def design_width(config: FnnConfig, n_scalar: int = 0) -> int:
    return sum(b.num_basis for b in config.weight_bases) + n_scalar


def output_units(response_mode: str, n_classes: int = 2, m_resp: int = 1) -> int:
    if response_mode == "classification":
        return n_classes
    if response_mode == "functional":
        return m_resp
    return 1


def parameter_count(config: FnnConfig, n_scalar: int = 0, out_units: int = 1) -> int:
    """Trainable parameters: sum over layers of fan_in * units + units."""
    total = 0
    fan_in = design_width(config, n_scalar)
    for spec in config.hidden:
        total += fan_in * spec.units + spec.units
        fan_in = spec.units
    total += fan_in * out_units + out_units
    return total


def _resolve_data(config, func_cov, model: FnnModel | None = None):
    """Turn raw or tensor input into a FunctionalDataSet."""
    if config.raw_data:
        if isinstance(func_cov, FunctionalDataSet):
            raise ValidationError(
                "raw_data is set but a coefficient tensor was passed"
            )
        raw_list = [func_cov] if isinstance(func_cov, RawCurves) else list(func_cov)
        if model is not None and model.smoothing_bases is not None:
            # prediction data reuses the training smoothing systems
            from .basis import Covariate, smooth_curves

            covs = [
                Covariate(system, smooth_curves(raw, system))
                for raw, system in zip(raw_list, model.smoothing_bases)
            ]
            if len(raw_list) != len(model.smoothing_bases):
                raise ValidationError(
                    "covariate count differs from the trained model"
                )
            return FunctionalDataSet(covs)
        return smooth_raw_covariates(raw_list, config.domain_ranges)
    if not isinstance(func_cov, FunctionalDataSet):
        raise ValidationError(
            "expected a FunctionalDataSet (or set raw_data for raw curves)"
        )
    return func_cov


def _encode_response(resp, mode: str):
    """Build the target matrix, the loss, and response metadata."""
    if mode == "regression":
        y = np.asarray(resp, dtype=float).reshape(-1, 1)
        return y, "mse", {"mode": mode}
    if mode == "classification":
        labels = [str(v) for v in np.asarray(resp).ravel()]
        classes = list(dict.fromkeys(labels))  # first-appearance order
        if len(classes) < 2:
            raise ValidationError("classification needs at least 2 classes")
        index = {c: i for i, c in enumerate(classes)}
        y = np.zeros((len(labels), len(classes)))
        for row, lab in enumerate(labels):
            y[row, index[lab]] = 1.0
        return y, "categorical_cross_entropy", {"mode": mode, "classes": classes}
    y = np.atleast_2d(np.asarray(resp, dtype=float))
    return y, "mse", {"mode": mode, "m_resp": y.shape[1]}


def summary(model: FnnModel) -> str:
    """Layer table with parameter counts, Keras-display style."""
    lines = [
        "Model",
        "-" * 72,
        f"{'Layer (type)':<34}{'Output Shape':<24}{'Param #':<12}",
        "=" * 72,
    ]
    for i, layer in enumerate(model.layers):
        name = f"dense_{i} (Dense)" if i else "dense (Dense)"
        shape = f"(None, {layer.weights.shape[1]})"
        lines.append(f"{name:<34}{shape:<24}{layer.n_params:<12}")
    lines.append("=" * 72)
    lines.append(f"Total params: {model.n_params:,}")
    lines.append(f"Trainable params: {model.n_params:,}")
    lines.append("Non-trainable params: 0")
    return "\n".join(lines)


def fit(
    resp,
    func_cov,
    config: FnnConfig,
    scalar_cov=None,
    print_info: bool = True,
    progress=None,
    stream=None,
) -> FnnModel:
    """Smooth (if raw), build integral features, and train the network."""
    fd = _resolve_data(config, func_cov)
    if fd.n_covariates != len(config.domain_ranges):
        raise ValidationError(
            f"{fd.n_covariates} functional covariates but "
            f"{len(config.domain_ranges)} domain ranges"
        )
    y, loss, response_meta = _encode_response(resp, config.response_mode)
    if y.shape[0] != fd.n_obs:
        raise ValidationError(
            f"response has {y.shape[0]} rows but covariates have {fd.n_obs}"
        )
    dm = integral_features(
        fd, list(config.weight_bases), scalar_cov, config.quad_points, progress
    )
    x = standardize(dm, dm.features)
    out_act = "softmax" if config.response_mode == "classification" else "linear"
    specs = list(config.hidden) + [LayerSpec(y.shape[1], out_act)]
    train_cfg = replace(config.train, loss=loss)
    layers, history = net.train(specs, train_cfg, x, y)
    model = FnnModel(
        config=config,
        design=dm,
        layers=layers,
        history=history,
        response_meta=response_meta,
        smoothed_data=fd if config.raw_data else None,
        smoothing_bases=tuple(c.basis for c in fd.covariates)
        if config.raw_data
        else None,
    )
    if print_info:
        print(summary(model), file=stream if stream is not None else sys.stdout)
    return model


def predict(model: FnnModel, func_cov, scalar_cov=None) -> np.ndarray:
    """Predictions for new data using the training standardization."""
    fd = _resolve_data(model.config, func_cov, model)
    if fd.n_covariates != len(model.config.weight_bases):
        raise ValidationError(
            "covariate count differs from the trained model"
        )
    dm = integral_features(
        fd, list(model.config.weight_bases), scalar_cov,
        model.config.quad_points,
    )
    if dm.n_columns != model.design.n_columns:
        raise ValidationError(
            f"feature width {dm.n_columns} differs from the trained model's "
            f"{model.design.n_columns}"
        )
    x = standardize(model.design, dm.features)
    return net.forward(model.layers, x)


def functional_weights(model: FnnModel) -> list[FunctionalWeight]:
    """Per-covariate weight curves: first-layer unit average, de-standardized.

    A weight attached to a standardized column acts on (x - mean) / scale,
    so dividing by the stored scale returns it to the original data scale.
    Before averaging, each first-layer unit is oriented by the sign of its
    downstream path to the first output: units whose effect on the response
    is negated would otherwise cancel in the mean and bury the curve shape.
    """
    first = model.layers[0].weights  # D x n1
    path = np.eye(first.shape[1])
    for layer in model.layers[1:]:
        path = path @ layer.weights
    signs = np.sign(path[:, 0])
    signs[signs == 0] = 1.0
    out = []
    for k, basis in enumerate(model.config.weight_bases):
        cols = model.design.func_columns(k)
        de_std = first[cols, :] / model.design.scale[cols][:, None]
        out.append(FunctionalWeight(k, basis, (de_std * signs).mean(axis=1)))
    return out


def curve_predictions(pred, domain, step_size: float, basis_kind: str = "fourier",
                      bspline_order: int = 4):
    """Evaluate predicted response coefficients on a regular grid.

    Returns (grid, curves) with curves[n] the n-th predicted curve over
    the grid.
    """
    pred = np.atleast_2d(np.asarray(pred, dtype=float))
    a, b = float(domain[0]), float(domain[1])
    if step_size <= 0:
        raise ValidationError("step_size must be positive")
    n_steps = int(round((b - a) / step_size))
    if n_steps < 1 or abs(n_steps * step_size - (b - a)) > 1e-9 * max(1.0, b - a):
        raise ValidationError(
            f"step_size {step_size} does not divide the domain [{a}, {b}]"
        )
    grid = a + step_size * np.arange(n_steps + 1)
    m_resp = pred.shape[1]
    if basis_kind == "fourier":
        if m_resp % 2 == 0:
            raise ValidationError(
                f"a fourier basis with {m_resp} terms is not constructible "
                f"(odd size required)"
            )
        system = fourier_basis(m_resp, (a, b))
    else:
        system = bspline_basis(m_resp, (a, b), order=bspline_order)
    curves = pred @ basis_eval(system, grid).T
    return grid, curves
