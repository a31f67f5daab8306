"""Tests for standardization, eigendecomposition, and subspace distances."""

import numpy as np
import pytest

from frechet_sdr.errors import (
    NotPositiveDefinite,
    NotSymmetric,
    RankDeficient,
    ShapeMismatch,
    SingularCovariance,
    ZeroVariance,
)
from frechet_sdr.linalg import (
    PredictorMatrix,
    benchmark_distance,
    inv_sqrt_psd,
    orthonormalize,
    projection_distance,
    standardize_full,
    standardize_marginal,
    top_eigenvectors,
)


class TestStandardizeFull:
    def test_whitening_large_sample(self):
        rng = np.random.default_rng(0)
        x = PredictorMatrix(rng.standard_normal((10000, 4)))
        _, _, s_inv = standardize_full(x)
        np.testing.assert_allclose(s_inv, np.eye(4), atol=0.1)

    def test_output_moments(self):
        rng = np.random.default_rng(1)
        x = PredictorMatrix(rng.uniform(size=(200, 5)) @ np.diag([1, 2, 3, 4, 5.0]))
        z, mean, _ = standardize_full(x)
        np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(z.T @ z / 200, np.eye(5), atol=1e-8)
        np.testing.assert_allclose(mean, x.x.mean(axis=0))

    def test_constant_column_is_singular(self):
        x = PredictorMatrix(np.column_stack([np.ones(10), np.arange(10.0)]))
        with pytest.raises(SingularCovariance):
            standardize_full(x)

    def test_scalar_case(self):
        # single predictor with population variance 4: inverse sd is 0.5
        x = PredictorMatrix(np.array([[0.0], [4.0]]))
        _, _, s_inv = standardize_full(x)
        np.testing.assert_allclose(s_inv, [[0.5]], atol=1e-9)


class TestStandardizeMarginal:
    def test_two_points(self):
        z, sds = standardize_marginal(PredictorMatrix(np.array([[0.0], [2.0]])))
        np.testing.assert_allclose(z, [[-1.0], [1.0]])
        np.testing.assert_allclose(sds, [1.0])

    def test_already_standardized(self):
        x = PredictorMatrix(np.array([[-1.0], [1.0]]))
        z, _ = standardize_marginal(x)
        np.testing.assert_allclose(z, x.x, atol=1e-12)

    def test_three_points(self):
        z, sds = standardize_marginal(PredictorMatrix(np.array([[1.0], [2.0], [3.0]])))
        np.testing.assert_allclose(sds, [np.sqrt(2.0 / 3.0)])
        np.testing.assert_allclose(z.ravel(), np.array([-1.0, 0.0, 1.0]) * np.sqrt(1.5))

    def test_zero_variance_column(self):
        with pytest.raises(ZeroVariance) as err:
            standardize_marginal(PredictorMatrix(np.array([[1.0, 1.0], [2.0, 1.0]])))
        assert err.value.column == 1


class TestInvSqrtPsd:
    def test_identity(self):
        np.testing.assert_allclose(inv_sqrt_psd(np.eye(3)), np.eye(3), atol=1e-14)

    def test_diagonal(self):
        np.testing.assert_allclose(
            inv_sqrt_psd(np.diag([4.0, 1.0])), np.diag([0.5, 1.0]), atol=1e-14
        )

    def test_zero_with_ridge(self):
        np.testing.assert_allclose(inv_sqrt_psd(np.array([[0.0]]), 1e-8), [[1e4]])

    def test_not_symmetric(self):
        with pytest.raises(NotSymmetric):
            inv_sqrt_psd(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_negative_eigenvalue(self):
        with pytest.raises(NotPositiveDefinite):
            inv_sqrt_psd(np.array([[-1.0]]))

    def test_round_trip(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            a = rng.normal(size=(5, 5))
            m = a @ a.T + 0.5 * np.eye(5)
            s = inv_sqrt_psd(m)
            np.testing.assert_allclose(s @ m @ s, np.eye(5), atol=1e-8)


class TestTopEigenvectors:
    def test_diagonal(self):
        sub = top_eigenvectors(np.diag([3.0, 2.0, 1.0]), 1)
        np.testing.assert_allclose(np.abs(sub.basis[:, 0]), [1.0, 0.0, 0.0], atol=1e-14)
        np.testing.assert_allclose(sub.eigenvalues, [3.0, 2.0, 1.0])

    def test_degenerate_spectrum_eigenvalues(self):
        sub = top_eigenvectors(np.eye(4), 1)
        np.testing.assert_allclose(sub.eigenvalues, np.ones(4))

    def test_rank_one(self):
        v = np.array([3.0, -4.0]) / 5.0
        sub = top_eigenvectors(np.outer(v, v), 1)
        assert projection_distance(sub.basis, v[:, None]) <= 1e-10

    def test_sign_convention(self):
        sub = top_eigenvectors(np.diag([3.0, 1.0]), 1)
        assert sub.basis[0, 0] > 0

    def test_by_magnitude(self):
        m = np.diag([-5.0, 2.0, 1.0])
        sub = top_eigenvectors(m, 1, by_magnitude=True)
        np.testing.assert_allclose(np.abs(sub.basis[:, 0]), [1.0, 0.0, 0.0], atol=1e-14)
        np.testing.assert_allclose(sub.eigenvalues, [5.0, 2.0, 1.0])

    def test_d0_out_of_range(self):
        with pytest.raises(ShapeMismatch):
            top_eigenvectors(np.eye(3), 4)


class TestProjectionDistance:
    def test_equal_bases(self):
        b = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        assert projection_distance(b, b) == 0.0

    def test_orthogonal_lines(self):
        e1 = np.array([[1.0], [0.0], [0.0]])
        e2 = np.array([[0.0], [1.0], [0.0]])
        assert projection_distance(e1, e2) == pytest.approx(np.sqrt(2.0))

    def test_basis_invariance(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            b = rng.normal(size=(6, 2))
            q = rng.normal(size=(2, 2)) + 2 * np.eye(2)
            other = rng.normal(size=(6, 2))
            d1 = projection_distance(b, other)
            d2 = projection_distance(b @ q, other)
            assert d1 == pytest.approx(d2, abs=1e-10)

    def test_range(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            b1 = rng.normal(size=(5, 2))
            b2 = rng.normal(size=(5, 1))
            d = projection_distance(b1, b2)
            assert 0.0 <= d <= np.sqrt(3.0) + 1e-12

    def test_orthogonal_subspaces_attain_max(self):
        b1 = np.eye(5)[:, :2]
        b2 = np.eye(5)[:, 2:3]
        assert projection_distance(b1, b2) == pytest.approx(np.sqrt(3.0))

    def test_rank_deficient(self):
        b = np.ones((4, 2))
        with pytest.raises(RankDeficient):
            projection_distance(b, np.eye(4)[:, :2])


class TestBenchmarkDistance:
    def test_no_information_levels(self):
        # expected distance between independent random subspaces
        assert benchmark_distance(10, 1, 1000, 1) == pytest.approx(1.337, abs=0.02)
        assert benchmark_distance(20, 1, 1000, 1) == pytest.approx(1.380, abs=0.02)
        assert benchmark_distance(10, 2, 1000, 1) == pytest.approx(1.763, abs=0.025)

    def test_deterministic(self):
        assert benchmark_distance(8, 2, 50, 123) == benchmark_distance(8, 2, 50, 123)


class TestOrthonormalize:
    def test_columns_orthonormal(self):
        rng = np.random.default_rng(5)
        b = orthonormalize(rng.normal(size=(6, 3)))
        np.testing.assert_allclose(b.T @ b, np.eye(3), atol=1e-12)

    def test_preserves_span(self):
        rng = np.random.default_rng(6)
        raw = rng.normal(size=(6, 2))
        assert projection_distance(raw, orthonormalize(raw)) <= 1e-10
