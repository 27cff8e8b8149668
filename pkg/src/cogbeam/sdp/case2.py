"""Case-2 multiuser design: all secondary users share the full band.

Each user ``K`` maximizes its self-interference-free SINR
``p_su |w2K^H H_K w1K|^2 / (w2K^H D_K w2K)`` under a PU budget
``I / N``, the unit-norm cap, and caps ``I'`` on the interference it puts
on every other receiver. Transmit and receive vectors are updated in turn.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import beamformer as bf
from ..channel import build_robust_matrices
from ..errors import SdpError, ValidationError
from .solver import SdpProblem, extract_rank_one, solve

__all__ = ['Case2Result', 'solve_case2', 'cross_interference', 'design_sum_rate',
           'realized_case2']

FEAS_SLACK = 1e-9


@dataclass(eq=False)
class Case2Result:
    """Outcome of the alternating design.

    ``history`` holds the design sum rate ``sum_K log2(1 + SINR_K)`` of each
    accepted, cross-feasible iterate, so it is nondecreasing. ``status`` has
    one entry per user: ``'ok'`` or ``'sdp_error'`` if that user's last
    transmit update failed and its previous vector was kept.
    """
    reports: list
    history: list
    rounds: int
    converged: bool
    status: list
    cross: np.ndarray = field(repr=False)

    @property
    def pairs(self):
        return [r.pair for r in self.reports]

    @property
    def sum_rate(self):
        return design_sum_rate([r.worst_case_sinr for r in self.reports])


def design_sum_rate(sinrs):
    return float(np.sum(np.log2(1.0 + np.asarray(sinrs, dtype=float))))


def cross_interference(rms, pairs, p_su):
    """``C[K, J] = p_su |w2K^H H_K w1J|^2``, the power of stream J at receiver K.

    The diagonal holds the useful signal powers.
    """
    n = len(pairs)
    C = np.empty((n, n))
    for k in range(n):
        g = rms[k].H_s.conj().T @ pairs[k].w2
        for j in range(n):
            C[k, j] = p_su * abs(np.vdot(g, pairs[j].w1)) ** 2
    return C


def _cross_ok(C, i_prime):
    off = C - np.diag(np.diag(C))
    return bool(np.all(off <= i_prime * (1.0 + FEAS_SLACK)))


def _sinrs(rms, pairs, cfg):
    return [bf.robust_sinr(rm, pr, cfg) for rm, pr in zip(rms, pairs)]


def _transmit_step(rms, pairs, cfg, budget, i_prime, k):
    rm = rms[k]
    n = rm.A.shape[0]
    w2 = pairs[k].w2
    g = rm.H_s.conj().T @ w2
    scale = cfg.p_su / float(np.real(np.vdot(w2, rm.D @ w2)))
    objective = scale * np.outer(g, g.conj())
    constraints = [(rm.B, budget / cfg.p_su), (np.eye(n), 1.0)]
    for j, other in enumerate(rms):
        if j == k:
            continue
        c = other.H_s.conj().T @ pairs[j].w2
        constraints.append((np.outer(c, c.conj()), i_prime / cfg.p_su))
    sol = solve(SdpProblem(objective, constraints))
    return extract_rank_one(sol).vector


def _receive_step(rms, pairs, cfg, i_prime, k):
    """Best feasible receive vector for user ``k`` among two candidates."""
    rm = rms[k]
    w1 = pairs[k].w1
    if not np.any(w1):
        return pairs[k].w2
    candidates = [bf.receive_beamformer(rm, w1)]
    folded = rm.D.copy()
    for j, pr in enumerate(pairs):
        if j != k:
            v = rm.H_s @ pr.w1
            folded = folded + cfg.p_su * np.outer(v, v.conj())
    folded = 0.5 * (folded + folded.conj().T)
    x = np.linalg.solve(folded, rm.H_s @ w1)
    if np.linalg.norm(x) > 0:
        candidates.append(x / np.linalg.norm(x))
    best, best_val = pairs[k].w2, bf.robust_sinr(rm, pairs[k], cfg)
    for w2 in candidates:
        leak = [cfg.p_su * abs(np.vdot(w2, rm.H_s @ pr.w1)) ** 2
                for j, pr in enumerate(pairs) if j != k]
        if any(x > i_prime * (1.0 + FEAS_SLACK) for x in leak):
            continue
        val = bf.robust_sinr(rm, bf.BeamformerPair(w1, w2), cfg)
        if val > best_val:
            best, best_val = w2, val
    return best


def solve_case2(channels, cfg, i_prime, max_rounds=20, tol=1e-6, regularization=None):
    """Alternating Case-2 design.

    Parameters
    ----------
    channels : list of ChannelSet
        One per user; they share the nominal PU channel ``h0``.
    cfg : SystemConfig
    i_prime : float
        Cap on the interference any user may put on another receiver.
    max_rounds : int
    tol : float
        A round is kept only if it raises the design sum rate by at least
        ``tol``; otherwise the iteration stops.
    regularization : float, optional
        Passed to ``build_robust_matrices``.

    Returns
    -------
    Case2Result
    """
    if not channels:
        raise ValidationError("at least one channel set is required")
    if not i_prime > 0:
        raise ValidationError(f"i_prime must be > 0, got {i_prime}")
    if max_rounds < 0:
        raise ValidationError("max_rounds must be >= 0")
    n_users = len(channels)
    budget = cfg.i_limit / n_users
    rms = [build_robust_matrices(cs, cfg, regularization) for cs in channels]
    reports = [bf.closed_form_transmit(rm, cfg, budget) for rm in rms]
    pairs = [r.pair for r in reports]
    status = ['ok'] * n_users

    current = design_sum_rate(_sinrs(rms, pairs, cfg))
    feasible = _cross_ok(cross_interference(rms, pairs, cfg.p_su), i_prime)
    history = [current] if feasible else []
    converged = False
    rounds = 0
    for _ in range(max_rounds):
        trial_status = list(status)
        new_w1 = []
        for k in range(n_users):
            try:
                new_w1.append(_transmit_step(rms, pairs, cfg, budget, i_prime, k))
                trial_status[k] = 'ok'
            except SdpError:
                new_w1.append(pairs[k].w1)
                trial_status[k] = 'sdp_error'
        trial = [bf.BeamformerPair(w1, pr.w2) for w1, pr in zip(new_w1, pairs)]
        trial = [bf.BeamformerPair(pr.w1, _receive_step(rms, trial, cfg, i_prime, k))
                 for k, pr in enumerate(trial)]
        value = design_sum_rate(_sinrs(rms, trial, cfg))
        trial_feasible = _cross_ok(cross_interference(rms, trial, cfg.p_su), i_prime)
        if trial_feasible and (not feasible or value >= current + tol):
            pairs, current, status, feasible = trial, value, trial_status, True
            history.append(current)
            rounds += 1
            reports = None
            continue
        status = trial_status
        converged = feasible
        break
    else:
        converged = False

    if reports is None:
        reports = []
        for rm, pr in zip(rms, pairs):
            bound = cfg.p_su * float(np.real(np.vdot(pr.w1, rm.B @ pr.w1)))
            reports.append(bf.DesignReport(pr, bf.robust_sinr(rm, pr, cfg), bound,
                                           bf.DesignMethod.SDP_CASE2))
    cross = cross_interference(rms, pairs, cfg.p_su)
    return Case2Result(reports=reports, history=history, rounds=rounds,
                       converged=converged, status=status, cross=cross)


def realized_case2(channels, pairs, cfg, h_true=None, h_prime_true=None):
    """Realized per-user SINR with the other users' streams as interference.

    ``h_true`` (shape ``(k, nt)``) and ``h_prime_true`` (list with one
    ``(k, nr)`` array per user) override the channels stored in
    ``channels``. Returns ``(sinr, pu_interference)`` with shapes
    ``(n_users, k)`` and ``(k,)``.
    """
    n_users = len(channels)
    if h_true is None:
        h_true = channels[0].h_true[None, :]
    if h_prime_true is None:
        h_prime_true = [cs.h_prime_true[None, :] for cs in channels]
    sinr = []
    pu = 0.0
    for k, (cs, pr) in enumerate(zip(channels, pairs)):
        others = sum(cfg.p_su * abs(np.vdot(pr.w2, cs.H_s @ pairs[j].w1)) ** 2
                     for j in range(n_users) if j != k)
        s, _, p = bf.realized_batch(cfg, cs.H_s, pr, h_true, h_prime_true[k], others)
        sinr.append(s)
        pu = pu + p
    return np.array(sinr), np.asarray(pu)
