"""Seeded synthetic data with a known true weight curve.

Curves are random Fourier-coefficient draws; responses come from a
brute-force trapezoid integral of the true weight against each curve, so
fitted weight curves can be checked against ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import (
    BasisSystem,
    Covariate,
    FunctionalDataSet,
    RawCurves,
    basis_eval,
    fourier_basis,
)

ORACLE_GRID_POINTS = 10_001


@dataclass(frozen=True)
class SyntheticData:
    raw: RawCurves
    fd: FunctionalDataSet
    response: np.ndarray
    beta_basis: BasisSystem
    beta_coefs: np.ndarray

    def beta_eval(self, t) -> np.ndarray:
        return basis_eval(self.beta_basis, t) @ self.beta_coefs


def brute_force_integrals(fd: FunctionalDataSet, beta_basis, beta_coefs,
                          n_points: int = ORACLE_GRID_POINTS) -> np.ndarray:
    """Dense trapezoid integral of beta(t) * x_n(t) for every observation."""
    cov = fd.covariates[0]
    a, b = cov.basis.domain
    grid = np.linspace(a, b, n_points)
    curve_vals = basis_eval(cov.basis, grid) @ cov.coefs  # G x N
    beta_vals = basis_eval(beta_basis, grid) @ beta_coefs
    return np.trapezoid(beta_vals[:, None] * curve_vals, grid, axis=0)


def make_regression(
    n: int = 150,
    seed: int = 0,
    domain=(0.0, 1.0),
    n_points: int = 100,
    noise: float = 0.05,
    curve_basis_size: int = 11,
    beta_basis_size: int = 7,
) -> SyntheticData:
    """Scalar-on-function regression: y = integral of beta* x + noise."""
    rng = np.random.default_rng(seed)
    curve_basis = fourier_basis(curve_basis_size, domain)
    beta_basis = fourier_basis(beta_basis_size, domain)
    coefs = rng.normal(0.0, 1.0, size=(curve_basis.num_basis, n))
    beta_coefs = rng.normal(0.0, 1.0, size=beta_basis.num_basis)
    fd = FunctionalDataSet([Covariate(curve_basis, coefs)])
    y = brute_force_integrals(fd, beta_basis, beta_coefs)
    y = y + noise * rng.normal(size=n)
    argvals = np.linspace(domain[0], domain[1], n_points)
    values = (basis_eval(curve_basis, argvals) @ coefs).T
    return SyntheticData(RawCurves(argvals, values), fd, y, beta_basis, beta_coefs)


def make_classification(
    n: int = 200,
    seed: int = 0,
    domain=(0.0, 1.0),
    n_points: int = 100,
    curve_basis_size: int = 11,
    beta_basis_size: int = 7,
) -> SyntheticData:
    """Two classes split by thresholding the true integral at its median."""
    data = make_regression(
        n=n,
        seed=seed,
        domain=domain,
        n_points=n_points,
        noise=0.0,
        curve_basis_size=curve_basis_size,
        beta_basis_size=beta_basis_size,
    )
    labels = (data.response > np.median(data.response)).astype(int)
    return SyntheticData(
        data.raw, data.fd, labels.astype(str), data.beta_basis, data.beta_coefs
    )
