import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app import linalg
from app.config import SETTINGS
from app.exceptions import ComplexityCapError, DimensionMismatchError, SingularSystemError
from app.linalg import (
    complex_matrix,
    complex_vector,
    hermitian_product,
    kron,
    ls_solve,
    numerical_rank,
    trace_inverse_gram,
)
from app.services.estimation_service import build_training_matrix, dft_training


class TestContainers:
    def test_vector_is_read_only(self):
        vector = complex_vector([1, 2j])
        with pytest.raises(ValueError):
            vector[0] = 3

    def test_vector_rejects_nan(self):
        with pytest.raises(ValueError):
            complex_vector([1.0, np.nan])

    def test_vector_length_checked(self):
        with pytest.raises(DimensionMismatchError):
            complex_vector([1, 2], length=3)

    def test_matrix_shape_checked(self):
        with pytest.raises(DimensionMismatchError):
            complex_matrix([1, 2, 3])
        with pytest.raises(DimensionMismatchError):
            complex_matrix(np.eye(2), shape=(3, 3))


class TestKron:
    @pytest.mark.parametrize(
        "u, expected",
        [
            ([1, -1], [1, -1, -1, 1]),
            ([1], [1]),
            ([1j, 1], [-1, 1j, 1j, 1]),
        ],
    )
    def test_examples(self, u, expected):
        assert_allclose(kron(u, u), expected)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            kron([1, 2], [1, 2, 3])

    def test_bilinear(self):
        generator = np.random.default_rng(21)
        u1, u2, w1, w2 = (generator.standard_normal(4) + 1j * generator.standard_normal(4) for _ in range(4))
        a, b = 0.7 - 1.2j, -2.0 + 0.5j
        assert_allclose(kron(a * u1 + b * u2, w1), a * kron(u1, w1) + b * kron(u2, w1), atol=1e-12)
        assert_allclose(kron(u1, a * w1 + b * w2), a * kron(u1, w1) + b * kron(u1, w2), atol=1e-12)

    def test_complexity_cap(self, monkeypatch):
        monkeypatch.setitem(SETTINGS, "kron_max_n", 2)
        with pytest.raises(ComplexityCapError):
            kron([1, 1, 1], [1, 1, 1])


class TestHermitianProduct:
    @pytest.mark.parametrize(
        "a, b, expected",
        [
            ([1, 0], [2 + 3j, 5], 2 + 3j),
            ([1j], [1j], 1),
            ([1 + 1j, 2], [1, 1j], 1 + 1j),
        ],
    )
    def test_examples(self, a, b, expected):
        assert hermitian_product(a, b) == pytest.approx(expected)

    def test_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            hermitian_product([1, 2], [1])


class TestLsSolve:
    def test_identity(self):
        assert_allclose(ls_solve(np.eye(3), [1, 1j, -1]), [1, 1j, -1])

    def test_overdetermined_mean(self):
        assert_allclose(ls_solve([[1], [1]], [2, 4]), [3])

    def test_random_full_rank(self):
        generator = np.random.default_rng(3)
        A = generator.standard_normal((8, 4)) + 1j * generator.standard_normal((8, 4))
        x0 = generator.standard_normal(4) + 1j * generator.standard_normal(4)
        assert_allclose(ls_solve(A, A @ x0), x0, rtol=1e-10)

    def test_residual_orthogonal_qr(self):
        generator = np.random.default_rng(17)
        A = generator.standard_normal((8, 4)) + 1j * generator.standard_normal((8, 4))
        y = generator.standard_normal(8) + 1j * generator.standard_normal(8)
        residual = A @ ls_solve(A, y) - y
        assert_allclose(A.conj().T @ residual, np.zeros(4), atol=1e-10)

    def test_residual_orthogonal_svd_fallback(self, monkeypatch, caplog):
        monkeypatch.setattr(linalg, "QR_CONDITION_LIMIT", 1.0)
        generator = np.random.default_rng(19)
        A = generator.standard_normal((8, 4)) + 1j * generator.standard_normal((8, 4))
        y = generator.standard_normal(8) + 1j * generator.standard_normal(8)
        with caplog.at_level(logging.WARNING, logger="app.linalg"):
            residual = A @ ls_solve(A, y) - y
        assert "mal condicionada" in caplog.text
        assert_allclose(A.conj().T @ residual, np.zeros(4), atol=1e-10)

    def test_ill_conditioned_takes_svd_path(self, caplog):
        generator = np.random.default_rng(23)
        U, _ = np.linalg.qr(generator.standard_normal((6, 3)) + 1j * generator.standard_normal((6, 3)))
        V, _ = np.linalg.qr(generator.standard_normal((3, 3)) + 1j * generator.standard_normal((3, 3)))
        A = U @ np.diag([1.0, 1e-3, 1e-10]) @ V.conj().T
        x0 = np.array([1.0, -1j, 0.5])
        with caplog.at_level(logging.WARNING, logger="app.linalg"):
            x = ls_solve(A, A @ x0)
        assert "mal condicionada" in caplog.text
        assert_allclose(A @ x, A @ x0, atol=1e-9)

    def test_rank_deficient(self):
        A = np.array([[1, 1], [2, 2], [3, 3]], dtype=complex)
        with pytest.raises(SingularSystemError) as info:
            ls_solve(A, [1, 2, 3])
        assert info.value.rank == 1
        assert info.value.expected == 2

    def test_underdetermined(self):
        with pytest.raises(SingularSystemError):
            ls_solve(np.ones((1, 2)), [1])


class TestTraceInverseGram:
    def test_scaled_identity(self):
        psi = 6.0
        assert trace_inverse_gram(np.sqrt(psi) * np.eye(4)) == pytest.approx(4 / psi)

    def test_matches_singular_values(self):
        generator = np.random.default_rng(29)
        A = generator.standard_normal((7, 4)) + 1j * generator.standard_normal((7, 4))
        singular_values = np.linalg.svd(A, compute_uv=False)
        assert trace_inverse_gram(A) == pytest.approx(np.sum(1.0 / singular_values ** 2), rel=1e-10)

    def test_optimal_plan(self):
        K, N = 5, 4
        A = build_training_matrix(dft_training(K, N)).A
        assert trace_inverse_gram(A) == pytest.approx((N + 1) / (3 * K), abs=1e-12)

    def test_random_matrix(self):
        generator = np.random.default_rng(11)
        A = generator.standard_normal((6, 3)) + 1j * generator.standard_normal((6, 3))
        expected = np.trace(np.linalg.inv(A.conj().T @ A)).real
        assert trace_inverse_gram(A) == pytest.approx(expected, rel=1e-9)


class TestNumericalRank:
    def test_identity(self):
        assert numerical_rank(np.eye(4)) == 4

    def test_repeated_column(self):
        generator = np.random.default_rng(5)
        A = generator.standard_normal((5, 3))
        A = np.column_stack([A, A[:, 0]])
        assert numerical_rank(A) == 3

    def test_optimal_training_matrix(self):
        assert numerical_rank(build_training_matrix(dft_training(4, 3)).A) == 4

    def test_zero_matrix(self):
        assert numerical_rank(np.zeros((3, 2))) == 0
