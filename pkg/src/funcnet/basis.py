"""Fourier and B-spline basis systems, evaluation, and least-squares smoothing.

A :class:`BasisSystem` is a fixed family of functions on a closed interval.
Curves are represented by their coefficient vectors against such a family,
collected per covariate in a :class:`FunctionalDataSet`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError, ValidationError

ENDPOINT_TOL = 1e-12

FOURIER = "fourier"
BSPLINE = "bspline"
BASIS_KINDS = (FOURIER, BSPLINE)


@dataclass(frozen=True)
class BasisSystem:
    """A family of basis functions on a closed interval.

    For Fourier systems ``num_basis`` must be odd (a constant plus
    sine/cosine pairs); even requests are rounded up at construction.
    For B-splines ``order`` is the polynomial order (degree + 1).
    """

    kind: str
    num_basis: int
    domain: tuple[float, float]
    order: int = 4

    def __post_init__(self):
        if self.kind not in BASIS_KINDS:
            raise ValidationError(f"unknown basis kind {self.kind!r}")
        if self.num_basis < 1:
            raise ValidationError("num_basis must be >= 1")
        a, b = self.domain
        if not b - a > 0:
            raise ValidationError(f"domain [{a}, {b}] has non-positive length")
        object.__setattr__(self, "domain", (float(a), float(b)))
        if self.kind == FOURIER and self.num_basis % 2 == 0:
            warnings.warn(
                f"fourier basis size {self.num_basis} rounded up to "
                f"{self.num_basis + 1} (odd size required)",
                stacklevel=2,
            )
            object.__setattr__(self, "num_basis", self.num_basis + 1)
        if self.kind == BSPLINE:
            if self.order < 1:
                raise ValidationError("bspline order must be >= 1")
            if self.num_basis < self.order:
                raise ValidationError(
                    f"bspline needs num_basis >= order "
                    f"({self.num_basis} < {self.order})"
                )

    @property
    def length(self) -> float:
        a, b = self.domain
        return b - a


def fourier_basis(num_basis: int, domain) -> BasisSystem:
    return BasisSystem(FOURIER, num_basis, tuple(domain))


def bspline_basis(num_basis: int, domain, order: int = 4) -> BasisSystem:
    return BasisSystem(BSPLINE, num_basis, tuple(domain), order=order)


@dataclass(frozen=True)
class RawCurves:
    """Discretized observations: N curves sampled on a shared grid.

    ``argvals`` is the strictly increasing vector of p evaluation points,
    ``values`` the N x p matrix of measurements.
    """

    argvals: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        argvals = np.asarray(self.argvals, dtype=float)
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "argvals", argvals)
        object.__setattr__(self, "values", values)
        if argvals.ndim != 1 or argvals.size < 2:
            raise ValidationError("argvals must be a vector of at least 2 points")
        if np.any(np.diff(argvals) <= 0):
            raise ValidationError("argvals must be strictly increasing")
        if values.shape[1] != argvals.size:
            raise ValidationError(
                f"values has {values.shape[1]} columns but argvals has "
                f"{argvals.size} points"
            )
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(argvals)):
            raise ValidationError("raw curves contain non-finite entries")

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_points(self) -> int:
        return self.argvals.size


@dataclass(frozen=True)
class Covariate:
    """One functional covariate: a basis system plus its M x N coefficients."""

    basis: BasisSystem
    coefs: np.ndarray

    def __post_init__(self):
        coefs = np.atleast_2d(np.asarray(self.coefs, dtype=float))
        object.__setattr__(self, "coefs", coefs)
        if coefs.shape[0] != self.basis.num_basis:
            raise ValidationError(
                f"coefficient matrix has {coefs.shape[0]} rows but the basis "
                f"has {self.basis.num_basis} functions"
            )


@dataclass(frozen=True)
class FunctionalDataSet:
    """K functional covariates over the same N observations."""

    covariates: list[Covariate] = field(default_factory=list)

    def __post_init__(self):
        if not self.covariates:
            raise ValidationError("a functional data set needs >= 1 covariate")
        n = self.covariates[0].coefs.shape[1]
        for k, cov in enumerate(self.covariates):
            if cov.coefs.shape[1] != n:
                raise ValidationError(
                    f"covariate {k} has {cov.coefs.shape[1]} observations, "
                    f"expected {n}"
                )

    @property
    def n_obs(self) -> int:
        return self.covariates[0].coefs.shape[1]

    @property
    def n_covariates(self) -> int:
        return len(self.covariates)

    def subset(self, indices) -> "FunctionalDataSet":
        """New data set restricted to the given observation indices."""
        idx = np.asarray(indices, dtype=int)
        return FunctionalDataSet(
            [Covariate(c.basis, c.coefs[:, idx]) for c in self.covariates]
        )


def _check_domain(system: BasisSystem, t: np.ndarray) -> np.ndarray:
    a, b = system.domain
    bad = (t < a - ENDPOINT_TOL) | (t > b + ENDPOINT_TOL)
    if np.any(bad):
        offending = float(t[bad][0])
        raise DomainError(
            f"point {offending} lies outside the domain [{a}, {b}]"
        )
    return np.clip(t, a, b)


def _bspline_knots(system: BasisSystem) -> np.ndarray:
    # endpoint multiplicity = order, equally spaced interior knots
    a, b = system.domain
    n_interior = system.num_basis - system.order
    interior = np.linspace(a, b, n_interior + 2)[1:-1]
    return np.concatenate(
        [np.full(system.order, a), interior, np.full(system.order, b)]
    )


def _bspline_design(knots: np.ndarray, order: int, num_basis: int,
                    t: np.ndarray) -> list[np.ndarray]:
    """Cox-de Boor recursion; returns design matrices for orders 1..order."""
    q = t.size
    b_end = knots[-1]
    n_first = len(knots) - 1
    design = np.zeros((q, n_first))
    for i in range(n_first):
        if knots[i] < knots[i + 1]:
            inside = (t >= knots[i]) & (t < knots[i + 1])
            # the right endpoint belongs to the last non-empty interval
            if knots[i + 1] == b_end:
                inside |= t == b_end
            design[inside, i] = 1.0
    per_order = [design]
    for k in range(2, order + 1):
        n_funcs = len(knots) - k
        nxt = np.zeros((q, n_funcs))
        prev = per_order[-1]
        for i in range(n_funcs):
            d1 = knots[i + k - 1] - knots[i]
            d2 = knots[i + k] - knots[i + 1]
            if d1 > 0:
                nxt[:, i] += (t - knots[i]) / d1 * prev[:, i]
            if d2 > 0:
                nxt[:, i] += (knots[i + k] - t) / d2 * prev[:, i + 1]
        per_order.append(nxt)
    return per_order


def basis_eval(system: BasisSystem, t) -> np.ndarray:
    """Evaluate every basis function at every point; shape (len(t), M)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    t = _check_domain(system, t)
    m = system.num_basis
    if system.kind == FOURIER:
        a, _ = system.domain
        period = system.length
        tp = t - a
        out = np.empty((t.size, m))
        out[:, 0] = 1.0 / np.sqrt(period)
        amp = np.sqrt(2.0 / period)
        for j in range(1, (m + 1) // 2):
            arg = 2.0 * np.pi * j * tp / period
            out[:, 2 * j - 1] = amp * np.sin(arg)
            if 2 * j < m:
                out[:, 2 * j] = amp * np.cos(arg)
        return out
    knots = _bspline_knots(system)
    return _bspline_design(knots, system.order, m, t)[-1][:, :m]


def basis_derivative(system: BasisSystem, t) -> np.ndarray:
    """First derivative of every basis function at every point."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    t = _check_domain(system, t)
    m = system.num_basis
    if system.kind == FOURIER:
        a, _ = system.domain
        period = system.length
        tp = t - a
        out = np.zeros((t.size, m))
        amp = np.sqrt(2.0 / period)
        for j in range(1, (m + 1) // 2):
            omega = 2.0 * np.pi * j / period
            arg = omega * tp
            out[:, 2 * j - 1] = amp * omega * np.cos(arg)
            if 2 * j < m:
                out[:, 2 * j] = -amp * omega * np.sin(arg)
        return out
    if system.order < 2:
        raise ValidationError("bspline derivative needs order >= 2")
    knots = _bspline_knots(system)
    per_order = _bspline_design(knots, system.order, m, t)
    lower = per_order[-2]
    k = system.order
    out = np.zeros((t.size, m))
    for i in range(m):
        d1 = knots[i + k - 1] - knots[i]
        d2 = knots[i + k] - knots[i + 1]
        if d1 > 0:
            out[:, i] += (k - 1) / d1 * lower[:, i]
        if d2 > 0:
            out[:, i] -= (k - 1) / d2 * lower[:, i + 1]
    return out


def smooth_curves(raw: RawCurves, system: BasisSystem) -> np.ndarray:
    """Least-squares basis coefficients for each observation; shape (M, N).

    Column n minimizes ||values_n - Phi c||^2 with Phi the basis design
    matrix at ``argvals``.
    """
    m = system.num_basis
    if raw.n_points < m:
        raise ValidationError(
            f"cannot smooth {raw.n_points} sample points with {m} basis "
            f"functions; use fewer basis terms"
        )
    phi = basis_eval(system, raw.argvals)
    coefs, _, rank, _ = np.linalg.lstsq(phi, raw.values.T, rcond=None)
    if rank < m:
        raise NumericalError(
            f"smoothing design matrix is rank deficient ({rank} < {m})"
        )
    return coefs


def curve_eval(fd: FunctionalDataSet, k: int, n: int, t) -> np.ndarray:
    """Evaluate observation n of covariate k at the points t."""
    if not 0 <= k < fd.n_covariates:
        raise ValidationError(f"covariate index {k} out of range")
    if not 0 <= n < fd.n_obs:
        raise ValidationError(f"observation index {n} out of range")
    cov = fd.covariates[k]
    return basis_eval(cov.basis, t) @ cov.coefs[:, n]


def default_smoothing_basis(domain, n_points: int) -> BasisSystem:
    """Fourier system used when raw curves arrive unprocessed.

    Targets 31 terms, capped at the largest odd size the grid supports so
    the least-squares problem stays determined.
    """
    m = min(31, n_points if n_points % 2 == 1 else n_points - 1)
    return fourier_basis(m, domain)


def smooth_raw_covariates(raw_list: list[RawCurves], domains) -> FunctionalDataSet:
    """Smooth each raw covariate with the default Fourier system."""
    if len(raw_list) != len(domains):
        raise ValidationError(
            f"{len(raw_list)} raw covariates but {len(domains)} domain ranges"
        )
    covs = []
    for raw, dom in zip(raw_list, domains):
        system = default_smoothing_basis(dom, raw.n_points)
        covs.append(Covariate(system, smooth_curves(raw, system)))
    return FunctionalDataSet(covs)
