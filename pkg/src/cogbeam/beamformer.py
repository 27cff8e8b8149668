"""Robust single-user transceiver design.

The transmit vector ``w1`` is normalized so that ``||w1|| <= 1`` with the
symbol power ``p_su`` factored out; the receive vector ``w2`` has unit norm.
"""

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError
from .hermitian import hermitian_eig_max, hermitian_inv_sqrt, hermitian_solve, phase_normalize
from .sdp.solver import SdpProblem, SdpSolution, extract_rank_one, solve

__all__ = ['BeamformerPair', 'DesignMethod', 'DesignReport', 'receive_beamformer',
           'robust_sinr', 'closed_form_transmit', 'sdp_transmit',
           'realized_performance', 'realized_batch', 'NORM_SLACK']

NORM_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class BeamformerPair:
    w1: np.ndarray
    w2: np.ndarray

    def __post_init__(self):
        w1 = np.asarray(self.w1, dtype=complex)
        w2 = np.asarray(self.w2, dtype=complex)
        if w1.ndim != 1 or w2.ndim != 1:
            raise ValidationError("w1 and w2 must be vectors")
        if np.linalg.norm(w1) > 1.0 + NORM_SLACK:
            raise ValidationError(f"||w1|| = {np.linalg.norm(w1):.12g} exceeds 1")
        if abs(np.linalg.norm(w2) - 1.0) > NORM_SLACK:
            raise ValidationError("w2 must have unit norm")
        object.__setattr__(self, 'w1', w1)
        object.__setattr__(self, 'w2', w2)


class DesignMethod(enum.Enum):
    CLOSED_FORM = 'closed_form'
    SDP_FALLBACK = 'sdp_fallback'
    SDP_CASE2 = 'sdp_case2'


@dataclass(frozen=True, eq=False)
class DesignReport:
    """A designed pair with its worst-case figures.

    ``robust_interference_bound`` is ``p_su w1^H B w1``, the largest PU
    interference over the uncertainty ball.
    """
    pair: BeamformerPair
    worst_case_sinr: float
    robust_interference_bound: float
    method: DesignMethod
    sdp: Optional[SdpSolution] = None


def receive_beamformer(rm, w1):
    """Unit-norm ``w2`` proportional to ``D^-1 H_s w1``.

    If ``H_s w1 = 0`` every receiver gives zero SINR and ``e1`` is returned.
    """
    w1 = np.asarray(w1, dtype=complex)
    if w1.ndim != 1 or not np.any(w1):
        raise ValidationError("w1 must be a nonzero vector")
    x = hermitian_solve(rm.D, rm.H_s @ w1)
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        e1 = np.zeros(rm.D.shape[0], dtype=complex)
        e1[0] = 1.0
        return e1
    return phase_normalize(x / nrm)


def robust_sinr(rm, pair, cfg):
    """Worst-case SINR ``p_su |w2^H H_s w1|^2 / (w2^H D w2)``."""
    num = cfg.p_su * abs(np.vdot(pair.w2, rm.H_s @ pair.w1)) ** 2
    den = float(np.real(np.vdot(pair.w2, rm.D @ pair.w2)))
    return float(num / den)


def _report(rm, cfg, w1, method, sol=None):
    if np.any(w1):
        w2 = receive_beamformer(rm, w1)
    else:
        w2 = np.zeros(rm.D.shape[0], dtype=complex)
        w2[0] = 1.0
    pair = BeamformerPair(w1, w2)
    bound = cfg.p_su * float(np.real(np.vdot(w1, rm.B @ w1)))
    return DesignReport(pair, robust_sinr(rm, pair, cfg), bound, method, sol)


def sdp_transmit(rm, cfg, budget=None):
    """Transmit design through the relaxation ``max tr(A W)`` subject to
    ``tr(B W) <= budget / p_su`` and ``tr(W) <= 1``."""
    budget = cfg.i_limit if budget is None else float(budget)
    n = rm.A.shape[0]
    problem = SdpProblem(rm.A, [(rm.B, budget / cfg.p_su), (np.eye(n), 1.0)])
    sol = solve(problem)
    w1 = extract_rank_one(sol).vector
    return _report(rm, cfg, w1, DesignMethod.SDP_FALLBACK, sol)


def closed_form_transmit(rm, cfg, budget=None):
    """Closed-form robust transmit beamformer.

    Parameters
    ----------
    rm : RobustMatrices
    cfg : SystemConfig
    budget : float, optional
        PU interference budget; defaults to ``cfg.i_limit``.

    Returns
    -------
    DesignReport
        ``method`` is ``CLOSED_FORM`` when the unit-norm cap is slack at the
        interference-tight solution, otherwise ``SDP_FALLBACK``.

    Raises
    ------
    ConditioningError
        ``B`` is singular.
    """
    budget = cfg.i_limit if budget is None else float(budget)
    if not budget > 0:
        raise ValidationError(f"budget must be > 0, got {budget}")
    ratio = budget / cfg.p_su
    S = hermitian_inv_sqrt(rm.B)
    M = S @ rm.A @ S
    M = 0.5 * (M + M.conj().T)
    lam, v = hermitian_eig_max(M)
    w1 = np.sqrt(ratio) * (S @ v)
    if np.linalg.norm(w1) > 1.0 + NORM_SLACK:
        return sdp_transmit(rm, cfg, budget)
    w2 = receive_beamformer(rm, w1)
    return DesignReport(BeamformerPair(w1, w2), float(ratio * max(lam, 0.0)), budget,
                        DesignMethod.CLOSED_FORM)


def realized_batch(cfg, H_s, pair, h_true, h_prime_true, extra_interference=0.0):
    """Realized SINR, rate and PU interference for stacked true channels.

    ``h_true`` has shape ``(k, nt)`` and ``h_prime_true`` shape ``(k, nr)``.
    ``extra_interference`` is added to the denominator (e.g. other SUs).
    """
    w1, w2 = pair.w1, pair.w2
    signal = cfg.p_su * abs(np.vdot(w2, H_s @ w1)) ** 2
    pu_leak = cfg.p_pu * np.abs(np.asarray(h_prime_true) @ w2.conj()) ** 2
    den = pu_leak + cfg.noise_power * float(np.vdot(w2, w2).real) + extra_interference
    sinr = signal / den
    pu_int = cfg.p_su * np.abs(np.asarray(h_true).conj() @ w1) ** 2
    return sinr, np.log2(1.0 + sinr), pu_int


def realized_performance(cs, pair, cfg):
    """Realized ``(sinr, rate, pu_interference)`` on the true channels of ``cs``."""
    sinr, rate, pu = realized_batch(cfg, cs.H_s, pair, cs.h_true[None, :],
                                    cs.h_prime_true[None, :])
    return float(sinr[0]), float(rate[0]), float(pu[0])
