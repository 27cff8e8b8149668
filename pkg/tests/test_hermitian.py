import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cogbeam.errors import ConditioningError, DomainError, NumericError, ValidationError
from cogbeam.hermitian import (check_hermitian, hermitian_eig, hermitian_eig_max,
                               hermitian_inv_sqrt, hermitian_solve, hermitian_sqrt,
                               phase_normalize)
from conftest import random_hermitian, random_pd


def charpoly_roots(M):
    """Eigenvalues from Faddeev-LeVerrier coefficients and companion-matrix roots."""
    n = M.shape[0]
    coeffs = [1.0 + 0j]
    Mk = np.zeros_like(M)
    I = np.eye(n)
    for k in range(1, n + 1):
        Mk = M @ Mk + coeffs[-1] * I
        coeffs.append(-np.trace(M @ Mk) / k)
    return np.sort(np.roots(coeffs).real)


hermitians = st.integers(min_value=1, max_value=7).flatmap(
    lambda n: st.integers(min_value=0, max_value=2 ** 32 - 1).map(
        lambda s: random_hermitian(np.random.default_rng(s), n)))


def test_identity_gives_e1():
    value, vec = hermitian_eig_max(np.eye(3))
    assert value == 1.0
    np.testing.assert_allclose(vec, [1, 0, 0])


def test_diagonal_max():
    value, vec = hermitian_eig_max(np.diag([2.0, 1.0]))
    assert value == 2.0
    np.testing.assert_allclose(vec, [1, 0])


@pytest.mark.parametrize('seed', range(10))
def test_eig_max_matches_charpoly_oracle(seed):
    M = random_hermitian(np.random.default_rng(seed), 5)
    oracle = charpoly_roots(M)
    value, vec = hermitian_eig_max(M)
    assert abs(value - oracle[-1]) <= 1e-8 * max(1.0, abs(oracle[-1]))
    assert abs(np.linalg.norm(vec) - 1) <= 1e-10
    assert np.linalg.norm(M @ vec - value * vec) <= 1e-8 * np.linalg.norm(M, 2)


@pytest.mark.parametrize('seed', range(5))
def test_full_spectrum_matches_charpoly_oracle(seed):
    M = random_hermitian(np.random.default_rng(100 + seed), 6)
    values, _ = hermitian_eig(M)
    np.testing.assert_allclose(values, charpoly_roots(M), atol=1e-8)


def test_phase_convention_first_entry_real_positive(rng):
    _, V = hermitian_eig(random_hermitian(rng, 4))
    for k in range(4):
        first = V[np.argmax(np.abs(V[:, k]) > 1e-12), k]
        assert abs(first.imag) < 1e-14 and first.real > 0


def test_phase_normalize_zero_vector():
    np.testing.assert_array_equal(phase_normalize(np.zeros(3)), np.zeros(3))


def test_non_hermitian_rejected():
    with pytest.raises(ValidationError):
        hermitian_eig_max(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValidationError):
        check_hermitian(np.array([[1j, 0], [0, 1]]))
    with pytest.raises(ValidationError):
        check_hermitian(np.ones((2, 3)))


def test_non_convergence_reports_residual(rng):
    with pytest.raises(NumericError) as info:
        hermitian_eig(random_hermitian(rng, 4), max_sweeps=0)
    assert info.value.residual > 0


def test_sqrt_trivial():
    np.testing.assert_allclose(hermitian_sqrt(np.eye(3)), np.eye(3), atol=1e-14)
    np.testing.assert_allclose(hermitian_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]),
                               atol=1e-14)


def test_sqrt_of_robust_b(rng):
    h0 = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    B = np.outer(h0, h0.conj()) + 3.0 * np.eye(5)
    S = hermitian_sqrt(B)
    assert np.linalg.norm(S @ S - B) / np.linalg.norm(B) <= 1e-8
    assert np.linalg.eigvalsh(S).min() > 0


def test_sqrt_clamps_drift_and_rejects_indefinite():
    S = hermitian_sqrt(np.diag([1.0, -1e-11]))
    np.testing.assert_allclose(S, np.diag([1.0, 0.0]), atol=1e-14)
    with pytest.raises(DomainError):
        hermitian_sqrt(np.diag([1.0, -1e-3]))


def test_inv_sqrt(rng):
    M = random_pd(rng, 4)
    S = hermitian_inv_sqrt(M)
    np.testing.assert_allclose(S @ M @ S, np.eye(4), atol=1e-10)
    with pytest.raises(ConditioningError):
        hermitian_inv_sqrt(np.diag([1.0, 0.0]))


def test_solve_trivial(rng):
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    np.testing.assert_allclose(hermitian_solve(np.eye(3), v), v, atol=1e-15)
    np.testing.assert_allclose(hermitian_solve(np.diag([2.0, 4.0]), [2.0, 4.0]), [1.0, 1.0])


def test_solve_residual_and_matrix_rhs(rng):
    M = random_pd(rng, 5)
    b = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    x = hermitian_solve(M, b)
    assert np.linalg.norm(M @ x - b) <= 1e-8 * np.linalg.norm(b)
    R = rng.standard_normal((5, 3))
    X = hermitian_solve(M, R)
    assert np.linalg.norm(M @ X - R) <= 1e-8 * np.linalg.norm(R)


def test_solve_near_singular():
    with pytest.raises(ConditioningError) as info:
        hermitian_solve(np.diag([1.0, 1e-14]), [1.0, 1.0])
    assert info.value.min_eigenvalue == pytest.approx(1e-14)
    with pytest.raises(ValidationError):
        hermitian_solve(np.eye(2), np.ones(3))


@settings(max_examples=60, deadline=None)
@given(hermitians)
def test_eigenvalues_sum_to_trace(M):
    values, V = hermitian_eig(M)
    scale = max(1.0, np.abs(values).max())
    assert abs(values.sum() - np.trace(M).real) <= 1e-8 * scale
    np.testing.assert_allclose(V.conj().T @ V, np.eye(len(values)), atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
def test_rank_one_max_equals_trace(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    M = np.outer(v, v.conj())
    value, _ = hermitian_eig_max(M)
    assert abs(value - np.trace(M).real) <= 1e-10 * max(1.0, np.trace(M).real)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
def test_sqrt_square_roundtrip(n, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    M = X @ X.conj().T
    S = hermitian_sqrt(M)
    assert np.linalg.norm(S @ S - M) <= 1e-8 * max(1.0, np.linalg.norm(M))
