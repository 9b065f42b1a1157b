"""Tests for Simpson quadrature and the integral-feature design matrix."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from funcnet import (
    Covariate,
    FunctionalDataSet,
    ValidationError,
    basis_eval,
    bspline_basis,
    fourier_basis,
    integral_features,
    simpson,
    simpson_rule,
    standardize,
    unstandardize,
)


class TestSimpsonRule:
    def test_weights_sum_to_length(self):
        for q in (3, 11, 101, 1001):
            rule = simpson_rule((0.5, 2.5), q)
            assert abs(rule.weights.sum() - 2.0) < 1e-12

    def test_weight_pattern(self):
        rule = simpson_rule((0, 1), 5)
        h = 0.25
        np.testing.assert_allclose(
            rule.weights, h / 3 * np.array([1, 4, 2, 4, 1])
        )

    def test_even_point_count_rejected(self):
        with pytest.raises(ValidationError):
            simpson_rule((0, 1), 100)

    def test_quadratic_exact(self):
        rule = simpson_rule((0, 1), 101)
        assert simpson(rule, rule.nodes**2) == pytest.approx(1 / 3, abs=1e-14)

    def test_constant_on_wider_domain(self):
        rule = simpson_rule((0, 2), 51)
        assert simpson(rule, np.ones(51)) == pytest.approx(2.0, abs=1e-12)

    def test_full_period_sine_vanishes(self):
        rule = simpson_rule((0, 1), 101)
        assert abs(simpson(rule, np.sin(2 * np.pi * rule.nodes))) < 1e-10

    def test_length_mismatch(self):
        rule = simpson_rule((0, 1), 11)
        with pytest.raises(ValidationError):
            simpson(rule, np.ones(10))


def _fourier_fd(n, m=11, seed=0, domain=(0.0, 1.0)):
    rng = np.random.default_rng(seed)
    system = fourier_basis(m, domain)
    return FunctionalDataSet(
        [Covariate(system, rng.normal(size=(system.num_basis, n)))]
    )


class TestIntegralFeatures:
    def test_constant_curve_against_constant_basis(self):
        # x(t) = 1 is sqrt(P) times the normalized constant basis function
        system = fourier_basis(1, (0, 1))
        fd = FunctionalDataSet([Covariate(system, np.array([[1.0]]))])
        dm = integral_features(fd, [system])
        assert dm.features[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_constant_curve_against_m3_basis(self):
        system1 = fourier_basis(1, (0, 1))
        fd = FunctionalDataSet([Covariate(system1, np.array([[1.0]]))])
        dm = integral_features(fd, [fourier_basis(3, (0, 1))])
        np.testing.assert_allclose(
            dm.features[0], [1.0, 0.0, 0.0], atol=1e-12
        )

    def test_matches_dense_trapezoid_oracle(self):
        fd = _fourier_fd(10, seed=2)
        wbasis = fourier_basis(7, (0, 1))
        dm = integral_features(fd, [wbasis])
        grid = np.linspace(0, 1, 100_000)
        curve_vals = basis_eval(fd.covariates[0].basis, grid) @ fd.covariates[0].coefs
        weight_vals = basis_eval(wbasis, grid)
        oracle = np.trapezoid(
            weight_vals[:, :, None] * curve_vals[:, None, :], grid, axis=0
        ).T
        rel = np.max(np.abs(dm.features - oracle)) / np.max(np.abs(oracle))
        assert rel < 1e-6

    def test_linearity(self):
        rng = np.random.default_rng(9)
        system = fourier_basis(9, (0, 1))
        wbasis = fourier_basis(5, (0, 1))
        cx = rng.normal(size=(9, 4))
        cy = rng.normal(size=(9, 4))

        def features(c):
            fd = FunctionalDataSet([Covariate(system, c)])
            return integral_features(fd, [wbasis]).features

        lhs = features(2.5 * cx - 0.7 * cy)
        rhs = 2.5 * features(cx) - 0.7 * features(cy)
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_grid_refinement_stable(self):
        fd = _fourier_fd(6, seed=4)
        wbasis = fourier_basis(7, (0, 1))
        f101 = integral_features(fd, [wbasis], rule_points=101).features
        f401 = integral_features(fd, [wbasis], rule_points=401).features
        rel = np.max(np.abs(f101 - f401)) / np.max(np.abs(f401))
        assert rel < 1e-6

    def test_cubic_bspline_exact(self):
        # both factors polynomial with joint degree <= 3: Simpson is exact
        lin = bspline_basis(2, (0, 1), order=2)  # piecewise degree-1
        fd = FunctionalDataSet([Covariate(lin, np.array([[1.0], [2.0]]))])
        dm = integral_features(fd, [bspline_basis(2, (0, 1), order=2)])
        # x(t) = 1 + t, against hat functions (1 - t) and t:
        # integral (1+t)(1-t) dt = 2/3, integral (1+t) t dt = 5/6
        np.testing.assert_allclose(dm.features[0], [2 / 3, 5 / 6], atol=1e-14)

    def test_domain_mismatch(self):
        fd = _fourier_fd(3)
        with pytest.raises(ValidationError, match="domain"):
            integral_features(fd, [fourier_basis(5, (0, 2))])

    def test_scalar_columns_appended(self):
        fd = _fourier_fd(4)
        scalars = np.arange(8.0).reshape(4, 2)
        dm = integral_features(fd, [fourier_basis(3, (0, 1))], scalars=scalars)
        assert dm.features.shape == (4, 5)
        np.testing.assert_array_equal(dm.features[:, 3:], scalars)
        assert dm.column_map[3] == ("scalar", 0)

    def test_non_finite_scalars_rejected(self):
        fd = _fourier_fd(3)
        scalars = np.array([[1.0], [np.nan], [0.0]])
        with pytest.raises(ValidationError, match="non-finite"):
            integral_features(fd, [fourier_basis(3, (0, 1))], scalars=scalars)


class TestStandardize:
    def _dm(self, rows):
        fd = _fourier_fd(rows.shape[0], m=1)
        return integral_features(
            fd, [fourier_basis(1, (0, 1))], scalars=rows
        )

    def test_training_rows_become_z_scores(self):
        rng = np.random.default_rng(1)
        rows = rng.normal(2.0, 3.0, size=(40, 3))
        dm = self._dm(rows)
        z = standardize(dm, dm.features)
        np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(z.std(axis=0), 1.0, atol=1e-12)

    def test_constant_column_passthrough(self):
        rows = np.column_stack([np.full(5, 7.0), np.arange(5.0)])
        dm = self._dm(rows)
        z = standardize(dm, dm.features)
        np.testing.assert_allclose(z[:, 1], 0.0, atol=1e-12)  # constant col

    def test_training_mean_row_maps_to_zero(self):
        rows = np.array([[1.0, 10.0], [2, 20], [3, 30], [4, 40], [5, 50]])
        dm = self._dm(rows)
        held_out = np.concatenate([dm.mean[:1], [3.0, 30.0]])[None, :]
        np.testing.assert_allclose(
            standardize(dm, held_out), 0.0, atol=1e-12
        )

    def test_column_mismatch(self):
        dm = self._dm(np.ones((3, 2)))
        with pytest.raises(ValidationError):
            standardize(dm, np.ones((2, 5)))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        rows = rng.normal(size=(6, 2)) * rng.uniform(0.5, 4.0)
        dm = self._dm(rows)
        back = unstandardize(dm, standardize(dm, dm.features))
        assert np.max(np.abs(back - dm.features)) < 1e-12
