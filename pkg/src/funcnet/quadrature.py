"""Composite Simpson quadrature and integral-feature design matrices.

The design matrix turns each functional covariate into one scalar feature
per weight-basis function (the integral of the weight basis against the
curve), so a network's functional first layer reduces to a dense layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSystem, FunctionalDataSet, basis_eval
from .errors import ValidationError

DEFAULT_QUAD_POINTS = 101


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Simpson rule: odd number of nodes spanning [a, b]."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def num_points(self) -> int:
        return self.nodes.size


def simpson_rule(domain, num_points: int = DEFAULT_QUAD_POINTS) -> QuadratureRule:
    """Build a Simpson rule with the h/3 * (1,4,2,...,4,1) weight pattern."""
    if num_points < 3 or num_points % 2 == 0:
        raise ValidationError(
            f"Simpson rule needs an odd number of points >= 3, got {num_points}"
        )
    a, b = float(domain[0]), float(domain[1])
    if not b > a:
        raise ValidationError(f"domain [{a}, {b}] has non-positive length")
    nodes = np.linspace(a, b, num_points)
    h = (b - a) / (num_points - 1)
    weights = np.full(num_points, 2.0)
    weights[1::2] = 4.0
    weights[0] = weights[-1] = 1.0
    weights *= h / 3.0
    return QuadratureRule(nodes, weights)


def simpson(rule: QuadratureRule, values) -> float:
    """Integrate sampled values against the rule's weights."""
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != rule.num_points:
        raise ValidationError(
            f"expected {rule.num_points} sampled values, got {values.shape[-1]}"
        )
    return float(values @ rule.weights) if values.ndim == 1 else values @ rule.weights


@dataclass(frozen=True)
class DesignMatrix:
    """Integral features plus scalar covariates, with training statistics.

    ``column_map`` records each column's provenance: ("func", k, m) for
    weight-basis function m of covariate k, ("scalar", j) for scalar j.
    Standardization statistics are computed from the rows the matrix was
    built from; callers apply them via :func:`standardize`.
    """

    features: np.ndarray
    column_map: tuple
    mean: np.ndarray
    scale: np.ndarray

    @property
    def n_columns(self) -> int:
        return len(self.column_map)

    def func_columns(self, k: int) -> list[int]:
        return [
            i for i, tag in enumerate(self.column_map)
            if tag[0] == "func" and tag[1] == k
        ]


def integral_features(
    fd: FunctionalDataSet,
    weight_bases: list[BasisSystem],
    scalars=None,
    rule_points: int = DEFAULT_QUAD_POINTS,
    progress=None,
) -> DesignMatrix:
    """Build the N x D design matrix of integral features.

    Feature column (k, m) holds the Simpson approximation of
    integral phi_km(t) * x_{k,n}(t) dt for each observation n. Scalar
    covariate columns are appended unchanged. ``progress`` is called once
    per covariate with (k, K) as the integrals for covariate k finish.
    """
    if len(weight_bases) != fd.n_covariates:
        raise ValidationError(
            f"{fd.n_covariates} covariates but {len(weight_bases)} weight bases"
        )
    n = fd.n_obs
    blocks = []
    column_map = []
    for k, (cov, wbasis) in enumerate(zip(fd.covariates, weight_bases)):
        if wbasis.domain != cov.basis.domain:
            raise ValidationError(
                f"weight basis domain {wbasis.domain} does not match covariate "
                f"{k} domain {cov.basis.domain}"
            )
        rule = simpson_rule(wbasis.domain, rule_points)
        curve_vals = basis_eval(cov.basis, rule.nodes) @ cov.coefs  # Q x N
        weight_vals = basis_eval(wbasis, rule.nodes)  # Q x Mw
        blocks.append(weight_vals.T @ (rule.weights[:, None] * curve_vals))
        column_map.extend(("func", k, m) for m in range(wbasis.num_basis))
        if progress is not None:
            progress(k + 1, fd.n_covariates)
    features = np.vstack(blocks).T  # N x sum(Mw)
    if scalars is not None:
        scalars = np.atleast_2d(np.asarray(scalars, dtype=float))
        if scalars.shape[0] != n:
            raise ValidationError(
                f"scalar covariates have {scalars.shape[0]} rows, expected {n}"
            )
        if not np.all(np.isfinite(scalars)):
            raise ValidationError("scalar covariates contain non-finite entries")
        features = np.hstack([features, scalars])
        column_map.extend(("scalar", j) for j in range(scalars.shape[1]))
    mean = features.mean(axis=0)
    scale = features.std(axis=0)
    scale[scale == 0.0] = 1.0  # constant columns pass through unchanged
    return DesignMatrix(features, tuple(column_map), mean, scale)


def standardize(dm: DesignMatrix, rows) -> np.ndarray:
    """Apply the design matrix's stored training statistics to new rows."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != dm.n_columns:
        raise ValidationError(
            f"expected {dm.n_columns} columns, got {rows.shape[1]}"
        )
    return (rows - dm.mean) / dm.scale


def unstandardize(dm: DesignMatrix, rows) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.shape[1] != dm.n_columns:
        raise ValidationError(
            f"expected {dm.n_columns} columns, got {rows.shape[1]}"
        )
    return rows * dm.scale + dm.mean
