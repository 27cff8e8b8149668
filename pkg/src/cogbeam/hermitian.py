"""Dense complex-Hermitian primitives.

Matrices here are at most a few tens of rows, so everything is built on a
cyclic complex Jacobi eigensolver. Matrices are plain ``numpy`` arrays;
``check_hermitian`` is the single validation gate.
"""

from typing import NamedTuple

import numpy as np

from .errors import ConditioningError, DomainError, NumericError, ValidationError

__all__ = ['EigenPair', 'check_hermitian', 'hermitian_eig', 'hermitian_eig_max',
           'hermitian_sqrt', 'hermitian_inv_sqrt', 'hermitian_solve',
           'phase_normalize']

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-10
JACOBI_MAX_SWEEPS = 100
PSD_CLAMP = 1e-10


class EigenPair(NamedTuple):
    value: float
    vector: np.ndarray


def check_hermitian(M, name='M'):
    """Return ``M`` as a complex square array, raising if it is not Hermitian.

    Tolerances are relative to the largest entry magnitude.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError(f"{name} has non-finite entries")
    scale = max(np.abs(M).max(), 1.0)
    if np.abs(M - M.conj().T).max() > HERMITIAN_TOL * scale:
        raise ValidationError(f"{name} is not Hermitian")
    if np.abs(M.diagonal().imag).max() > HERMITIAN_TOL * scale:
        raise ValidationError(f"{name} has complex diagonal entries")
    return M


def phase_normalize(v, tol=1e-12):
    """Rotate ``v`` so its first non-negligible entry is real positive."""
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    peak = mags.max() if v.size else 0.0
    if peak == 0.0:
        return v.copy()
    k = int(np.argmax(mags > tol * peak))
    return v * (np.conj(v[k]) / mags[k])


def _off_norm(A):
    return np.linalg.norm(A - np.diag(A.diagonal()))


def _jacobi(M, tol, max_sweeps):
    """Cyclic Jacobi on a Hermitian matrix.

    Returns the (unsorted) diagonal after convergence and the accumulated
    unitary whose columns are the eigenvectors.
    """
    A = M.copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = np.linalg.norm(A)
    if scale == 0.0 or n == 1:
        return A.diagonal().real.copy(), V
    target = tol * scale
    off = 0.0
    polished = False
    for _ in range(max_sweeps):
        off = _off_norm(A)
        if off <= target:
            # one extra sweep: convergence is quadratic, so this is nearly free
            if polished or off == 0.0:
                return A.diagonal().real.copy(), V
            polished = True
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                app = A[p, p].real
                aqq = A[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # U = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                U = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ U
                A[idx, :] = U.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ U
    off = _off_norm(A)
    if off <= target:
        return A.diagonal().real.copy(), V
    raise NumericError(f"Jacobi did not converge in {max_sweeps} sweeps "
                       f"(off-diagonal norm {off:.3e})", residual=off)


def hermitian_eig(M, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Full eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    M : array_like, shape (n, n)
    tol : float
        Convergence threshold on the off-diagonal Frobenius norm, relative
        to ``||M||_F``.
    max_sweeps : int

    Returns
    -------
    values : ndarray, shape (n,)
        Eigenvalues in ascending order.
    vectors : ndarray, shape (n, n)
        Matching unit eigenvectors as columns, each phase normalized.
    """
    M = check_hermitian(M)
    d, V = _jacobi(M, tol, max_sweeps)
    order = np.argsort(d, kind='stable')
    V = V[:, order]
    for k in range(V.shape[1]):
        V[:, k] = phase_normalize(V[:, k])
    return d[order], V


def hermitian_eig_max(M):
    """Largest eigenvalue of ``M`` with its unit eigenvector.

    Among exactly tied eigenvalues the one sitting on the lowest diagonal
    index after the Jacobi sweeps wins, so ``I`` yields ``e1``.
    """
    M = check_hermitian(M)
    d, V = _jacobi(M, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    k = int(np.argmax(d))
    return EigenPair(float(d[k]), phase_normalize(V[:, k]))


def _psd_eig(M, name):
    values, vectors = hermitian_eig(M)
    floor = -PSD_CLAMP * max(1.0, np.abs(values).max())
    if values[0] < floor:
        raise DomainError(f"{name} is indefinite (min eigenvalue {values[0]:.3e})")
    return np.clip(values, 0.0, None), vectors


def hermitian_sqrt(M):
    """Hermitian PSD square root ``S`` with ``S @ S == M``.

    Eigenvalues in ``[-1e-10, 0)`` are treated as floating-point drift and
    clamped to zero.
    """
    values, V = _psd_eig(M, 'M')
    S = (V * np.sqrt(values)) @ V.conj().T
    return 0.5 * (S + S.conj().T)


def hermitian_inv_sqrt(M):
    """Inverse of ``hermitian_sqrt(M)``; ``M`` must be positive definite."""
    values, V = _psd_eig(M, 'M')
    if values[0] <= 1e-12 * values[-1] or values[-1] == 0.0:
        raise ConditioningError("matrix is singular; no inverse square root",
                                float(values[0]))
    S = (V / np.sqrt(values)) @ V.conj().T
    return 0.5 * (S + S.conj().T)


def hermitian_solve(M, rhs):
    """Solve ``M x = rhs`` for positive definite Hermitian ``M``.

    ``rhs`` may be a vector or a matrix of stacked right-hand sides.

    Raises
    ------
    ConditioningError
        If the smallest eigenvalue is not above ``1e-12 * ||M||``.
    """
    M = check_hermitian(M)
    rhs = np.asarray(rhs, dtype=complex)
    if rhs.shape[0] != M.shape[0]:
        raise ValidationError(f"rhs has {rhs.shape[0]} rows, expected {M.shape[0]}")
    values, V = hermitian_eig(M)
    top = np.abs(values).max()
    if values[0] <= 1e-12 * top or top == 0.0:
        raise ConditioningError(f"matrix not safely positive definite "
                                f"(min eigenvalue {values[0]:.3e})", float(values[0]))
    Vh = V.conj().T

    def apply_inv(b):
        if b.ndim == 1:
            return V @ ((Vh @ b) / values)
        return V @ ((Vh @ b) / values[:, None])

    x = apply_inv(rhs)
    # one step of iterative refinement
    x = x + apply_inv(rhs - M @ x)
    return x
