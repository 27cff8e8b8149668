"""Small dense complex SDPs with a linear objective and trace constraints.

Solves

    maximize    tr(A W)
    subject to  tr(B_i W) <= b_i,   W Hermitian PSD

with an infeasible-start primal-dual interior-point method (HKM search
direction, Mehrotra predictor-corrector). Scalar constraints carry explicit
slacks ``s``, so the Newton system reduces to an ``m x m`` Schur complement.
The problem is rescaled to unit-size data before iterating.
"""

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..errors import SdpError, ValidationError
from ..hermitian import check_hermitian, hermitian_eig

__all__ = ['SdpProblem', 'SdpSolution', 'RankOneVector', 'solve', 'extract_rank_one']

GAP_TOL = 1e-10
FEAS_TOL = 1e-11
MAX_ITER = 500
STEP_FRACTION = 0.98
CENTERING_FLOOR = 1e-3
# accepted when rounding stalls the iteration before the target tolerances
ACCEPT_GAP = 1e-8
ACCEPT_FEAS = 1e-9


@dataclass(eq=False)
class SdpProblem:
    """``maximize tr(objective W)`` s.t. ``tr(B_i W) <= b_i`` for each
    ``(B_i, b_i)`` in ``constraints``."""
    objective: np.ndarray
    constraints: list

    def __post_init__(self):
        self.objective = check_hermitian(self.objective, 'objective')
        n = self.objective.shape[0]
        checked = []
        for i, (B, b) in enumerate(self.constraints):
            B = check_hermitian(B, f'constraint {i}')
            if B.shape != (n, n):
                raise ValidationError(f"constraint {i} has shape {B.shape}, expected {(n, n)}")
            if not np.isfinite(b):
                raise ValidationError(f"constraint {i} bound is not finite")
            checked.append((B, float(b)))
        if not checked:
            raise ValidationError("at least one constraint is required")
        self.constraints = checked

    @property
    def dim(self):
        return self.objective.shape[0]


@dataclass(eq=False)
class SdpSolution:
    W: np.ndarray
    objective_value: float
    duality_gap: float
    iterations: int
    dual: np.ndarray = field(repr=False)
    dual_slack: np.ndarray = field(repr=False)
    problem: SdpProblem = field(repr=False)
    status: str = 'optimal'


class RankOneVector(NamedTuple):
    vector: np.ndarray
    defect: float
    status: str


def _inner(X, Y):
    # Re tr(X Y) for Hermitian X, Y
    return float(np.real(np.vdot(X, Y)))


def _check_bounded(problem):
    # Sufficient condition: some nonnegative combination of PSD constraint
    # matrices is positive definite.
    total = np.zeros_like(problem.objective)
    for B, _ in problem.constraints:
        values = np.linalg.eigvalsh(B)
        if values[0] >= -1e-12 * max(1.0, abs(values[-1])):
            total = total + B / max(abs(values[-1]), 1e-300)
    if np.linalg.eigvalsh(total)[0] <= 1e-12:
        raise SdpError("no constraint combination bounds W; problem may be unbounded",
                       status='unbounded')


def _normalize(problem):
    A = problem.objective
    a_scale = float(np.abs(np.linalg.eigvalsh(A)).max())
    if a_scale == 0.0:
        a_scale = 1.0
    Bs, bs, scales = [], [], []
    for B, b in problem.constraints:
        c = max(abs(b), float(np.abs(np.linalg.eigvalsh(B)).max()))
        if c == 0.0:
            c = 1.0
        Bs.append(B / c)
        bs.append(b / c)
        scales.append(c)
    return A / a_scale, np.array(Bs), np.array(bs), a_scale, np.array(scales)


def _initial_point(Bs, bs, n):
    traces = np.array([np.trace(B).real for B in Bs])
    if np.any((bs <= 0) & (traces >= 0)):
        raise SdpError("constraints admit no strictly feasible point", status='infeasible')
    pos = traces > 0
    alpha = 1.0
    if np.any(pos):
        alpha = 0.5 * float(np.min(bs[pos] / traces[pos]))
    W = alpha * np.eye(n, dtype=complex)
    slack = bs - np.einsum('kij,ji->k', Bs, W).real
    if np.any(slack <= 0):
        raise SdpError("could not find a strictly feasible starting point", status='infeasible')
    return W


class _Stall(Exception):
    pass


def _pd(X):
    try:
        return np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        return None


def _max_step(L, dX, v, dv):
    # largest a <= 1 keeping L L^H + a dX and v + a dv positive
    a = 1.0
    Li = np.linalg.inv(L)
    lo = np.linalg.eigvalsh(Li @ dX @ Li.conj().T)[0]
    if lo < 0:
        a = min(a, -1.0 / lo)
    neg = dv < 0
    if np.any(neg):
        a = min(a, float(np.min(-v[neg] / dv[neg])))
    return a


def _step(W, s, y, Z, Bs, r_p, R_d, mu, degree):
    """One Mehrotra predictor-corrector step with the HKM direction."""
    Lw, Lz = _pd(W), _pd(Z)
    if Lw is None or Lz is None:
        raise _Stall()
    Zi = np.linalg.inv(Lz)
    Zinv = Zi.conj().T @ Zi
    Zinv = 0.5 * (Zinv + Zinv.conj().T)
    BW = np.einsum('kij,jl->kil', Bs, W)             # B_k W
    BZ = np.einsum('kij,jl->kil', Bs, Zinv)          # B_k Z^-1
    # schur_kl = Re tr(B_k W B_l Z^-1) + delta_kl s_k / y_k
    schur = np.real(np.einsum('kij,lji->kl', BW, BZ)) + np.diag(s / y)
    WRZ = W @ R_d @ Zinv
    WRZ = 0.5 * (WRZ + WRZ.conj().T)

    def direction(sigma):
        target = sigma * mu
        base = target * Zinv - W + WRZ
        rhs = (np.array([_inner(B, base) for B in Bs])
               + (target - s * y) / y - r_p)
        dy = np.linalg.solve(schur, rhs)
        dZ = np.einsum('k,kij->ij', dy, Bs) - R_d
        dZ = 0.5 * (dZ + dZ.conj().T)
        T = W @ dZ @ Zinv
        dW = target * Zinv - W - 0.5 * (T + T.conj().T)
        dW = 0.5 * (dW + dW.conj().T)
        ds = (target - s * y - s * dy) / y
        return dW, ds, dy, dZ

    try:
        dW, ds, dy, dZ = direction(0.0)
        ap = _max_step(Lw, dW, s, ds)
        ad = _max_step(Lz, dZ, y, dy)
        mu_aff = (_inner(W + ap * dW, Z + ad * dZ)
                  + float((s + ap * ds) @ (y + ad * dy))) / degree
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
        sigma = max(sigma, CENTERING_FLOOR)
        dW, ds, dy, dZ = direction(sigma)
        ap = min(1.0, STEP_FRACTION * _max_step(Lw, dW, s, ds))
        ad = min(1.0, STEP_FRACTION * _max_step(Lz, dZ, y, dy))
    except np.linalg.LinAlgError:
        raise _Stall()
    # rounding can still push an eigenvalue through zero; back off
    for _ in range(30):
        W_new = W + ap * dW
        W_new = 0.5 * (W_new + W_new.conj().T)
        s_new = s + ap * ds
        if _pd(W_new) is not None and np.all(s_new > 0):
            break
        ap *= 0.5
    else:
        raise _Stall()
    for _ in range(30):
        Z_new = Z + ad * dZ
        Z_new = 0.5 * (Z_new + Z_new.conj().T)
        y_new = y + ad * dy
        if _pd(Z_new) is not None and np.all(y_new > 0):
            break
        ad *= 0.5
    else:
        raise _Stall()
    if ap < 1e-12 and ad < 1e-12:
        raise _Stall()
    return W_new, s_new, y_new, Z_new


def solve(problem, gap_tol=GAP_TOL, feas_tol=FEAS_TOL, max_iter=MAX_ITER):
    """Solve an ``SdpProblem``.

    Parameters
    ----------
    problem : SdpProblem
    gap_tol : float
        Stop when ``b^T y - tr(A W) <= gap_tol * (1 + |tr(A W)|)``.
    feas_tol : float
        Relative primal and dual residual required at termination.
    max_iter : int
        Cap on path-following iterations.

    Returns
    -------
    SdpSolution
        ``dual`` holds multipliers ``y >= 0`` and ``dual_slack`` the matrix
        ``Z = sum_i y_i B_i - A`` (PSD up to rounding);
        ``duality_gap = b^T y - tr(A W)``.

    Raises
    ------
    SdpError
        With ``status`` ``infeasible``, ``unbounded`` or ``max_iter``.
    """
    _check_bounded(problem)
    n = problem.dim
    m = len(problem.constraints)
    A_hat, Bs, bs, a_scale, c_scale = _normalize(problem)
    I = np.eye(n)

    # primal (W, s), dual (y, Z); the primal start is strictly feasible
    W = _initial_point(Bs, bs, n)
    s = bs - np.einsum('kij,ji->k', Bs, W).real
    y = np.ones(m)
    Z = I.astype(complex)
    degree = n + m
    b_norm = 1.0 + np.abs(bs).max()
    c_norm = 1.0 + np.linalg.norm(A_hat)

    status = 'optimal'
    for iteration in range(1, max_iter + 1):
        trBW = np.einsum('kij,ji->k', Bs, W).real
        r_p = bs - trBW - s
        R_d = A_hat - np.einsum('k,kij->ij', y, Bs) + Z
        primal_obj = _inner(A_hat, W)
        dual_obj = float(bs @ y)
        mu = (_inner(W, Z) + float(s @ y)) / degree
        p_res = np.linalg.norm(r_p) / b_norm
        d_res = np.linalg.norm(R_d) / c_norm
        gap = dual_obj - primal_obj
        if (abs(gap) * a_scale <= gap_tol * (1.0 + a_scale * abs(primal_obj))
                and p_res <= feas_tol and d_res <= feas_tol):
            break
        if np.linalg.norm(W) > 1e10:
            raise SdpError("primal iterates diverged; problem is unbounded",
                           status='unbounded')
        if np.linalg.norm(y) > 1e12:
            raise SdpError("dual iterates diverged; problem is infeasible",
                           status='infeasible')

        acceptable = (abs(gap) * a_scale <= ACCEPT_GAP * (1.0 + a_scale * abs(primal_obj))
                      and p_res <= ACCEPT_FEAS and d_res <= ACCEPT_FEAS)
        if iteration == max_iter and acceptable:
            status = 'near_optimal'
            break
        try:
            W, s, y, Z = _step(W, s, y, Z, Bs, r_p, R_d, mu, degree)
        except _Stall:
            if acceptable:
                status = 'near_optimal'
                break
            raise SdpError("interior-point step failed to keep iterates positive definite",
                           status='numerical', gap=gap * a_scale)
    else:
        raise SdpError(f"SDP did not converge in {max_iter} iterations "
                       f"(gap {gap * a_scale:.3e})", status='max_iter', gap=gap * a_scale)

    A = problem.objective
    y_orig = a_scale * y / c_scale
    Z_orig = sum(yi * B for yi, (B, _) in zip(y_orig, problem.constraints)) - A
    Z_orig = 0.5 * (Z_orig + Z_orig.conj().T)
    objective = _inner(A, W)
    b = np.array([bi for _, bi in problem.constraints])
    duality_gap = float(b @ y_orig - objective)
    return SdpSolution(W=W, objective_value=objective, duality_gap=duality_gap,
                       iterations=iteration, dual=y_orig, dual_slack=Z_orig,
                       problem=problem, status=status)


def extract_rank_one(sol, target_norm_sq=None):
    """Principal rank-one factor ``sqrt(l1) v1`` of an SDP solution.

    The vector is shrunk, if needed, so that every constraint of
    ``sol.problem`` holds and ``||w||^2 <= target_norm_sq`` (when given).

    Returns
    -------
    RankOneVector
        ``defect`` is ``l2 / l1``; ``status`` is ``'zero'`` (with a warning)
        when ``W`` has no positive eigenvalue.
    """
    values, vectors = hermitian_eig(sol.W)
    l1 = values[-1]
    n = values.size
    if l1 <= 0.0:
        warnings.warn("SDP solution is zero; rank-one factor is the zero vector")
        return RankOneVector(np.zeros(n, dtype=complex), 0.0, 'zero')
    defect = float(max(values[-2], 0.0) / l1) if n > 1 else 0.0
    w = np.sqrt(l1) * vectors[:, -1]
    scale = 1.0
    for B, b in sol.problem.constraints:
        q = float(np.real(np.vdot(w, B @ w)))
        if q > b:
            scale = min(scale, np.sqrt(b / q) if b > 0 else 0.0)
    if target_norm_sq is not None:
        q = float(np.real(np.vdot(w, w)))
        if q > target_norm_sq:
            scale = min(scale, np.sqrt(target_norm_sq / q))
    return RankOneVector(scale * w, defect, 'ok')
