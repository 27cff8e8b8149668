"""Case-1 multiuser design: users on orthogonal sub-bands share one PU budget.

User ``K`` reaches worst-case SINR ``I^K y^K`` with budget ``I^K``, so the
split of the total budget ``I`` across users is a scalar allocation problem.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import beamformer as bf
from .channel import build_robust_matrices
from .errors import ValidationError
from .hermitian import hermitian_eig_max, hermitian_inv_sqrt

__all__ = ['AllocationMode', 'AllocationResult', 'per_user_gain', 'optimal_split',
           'fair_split', 'case1_sum_rate', 'Case1Design', 'design_case1']


class AllocationMode(enum.Enum):
    OPTIMAL = 'optimal'
    FAIR = 'fair'


@dataclass(frozen=True)
class AllocationResult:
    """Budget split over users.

    ``budgets``/``rates`` are indexed by original user; dropped users have
    budget 0 and rate 0. ``sum_rate`` carries the ``1/N`` prefactor over
    the original user count.
    """
    budgets: tuple
    gains: tuple
    rates: tuple
    sum_rate: float
    dropped: tuple
    mode: AllocationMode

    @property
    def active(self):
        return tuple(k for k in range(len(self.gains)) if k not in self.dropped)


def per_user_gain(rm, cfg):
    """Worst-case SINR per unit interference budget, ``lambda_max(M) / p_su``
    with ``M = B^-1/2 A B^-1/2``."""
    S = hermitian_inv_sqrt(rm.B)
    M = S @ rm.A @ S
    return hermitian_eig_max(0.5 * (M + M.conj().T)).value / cfg.p_su


def _check_gains(gains, i_limit):
    g = np.asarray(gains, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ValidationError("gains must be a nonempty sequence")
    if not np.all(np.isfinite(g)) or np.any(g <= 0):
        raise ValidationError("all gains must be finite and > 0")
    if not i_limit > 0:
        raise ValidationError(f"I_limit must be > 0, got {i_limit}")
    return g


def _result(g, budgets, dropped, mode):
    rates = np.log2(1.0 + budgets * g)
    return AllocationResult(budgets=tuple(float(b) for b in budgets),
                            gains=tuple(float(x) for x in g),
                            rates=tuple(float(r) for r in rates),
                            sum_rate=float(rates.sum() / g.size),
                            dropped=tuple(dropped), mode=mode)


def _lagrange_split(inv, i_limit):
    return (i_limit + inv.sum()) / inv.size - inv


def optimal_split(gains, i_limit):
    """Sum-rate optimal split of ``i_limit``.

    Users whose closed-form budget is not positive are dropped one at a
    time (most negative first, lowest index on ties) and the split is
    recomputed over the rest.
    """
    g = _check_gains(gains, i_limit)
    active = list(range(g.size))
    dropped = []
    while True:
        share = _lagrange_split(1.0 / g[active], i_limit)
        worst = int(np.argmin(share))
        if share[worst] > 0:
            break
        dropped.append(active.pop(worst))
    budgets = np.zeros(g.size)
    budgets[active] = share
    return _result(g, budgets, sorted(dropped), AllocationMode.OPTIMAL)


def fair_split(gains, i_limit):
    """Split equalizing ``I^K y^K`` (hence the rates) across all users."""
    g = _check_gains(gains, i_limit)
    inv = 1.0 / g
    budgets = i_limit * inv / inv.sum()
    return _result(g, budgets, [], AllocationMode.FAIR)


def case1_sum_rate(alloc, n_users_original):
    """``(1 / N) sum_K log2(1 + I^K y^K)`` over the active users."""
    if n_users_original < 1:
        raise ValidationError("n_users_original must be >= 1")
    total = sum(np.log2(1.0 + alloc.budgets[k] * alloc.gains[k]) for k in alloc.active)
    return float(total / n_users_original)


@dataclass(frozen=True, eq=False)
class Case1Design:
    """Allocation plus per-user designs; ``reports[k]`` is ``None`` for
    dropped users. ``rerouted`` lists users whose closed form broke the
    unit-norm cap and went through the SDP path."""
    allocation: AllocationResult
    reports: tuple
    rerouted: tuple

    @property
    def design_rates(self):
        return tuple(0.0 if r is None else float(np.log2(1.0 + r.worst_case_sinr))
                     for r in self.reports)


def design_case1(channel_sets, cfg, mode=AllocationMode.OPTIMAL, regularization=None):
    """Gains, budget split and per-user beamformers for Case 1."""
    mode = AllocationMode(mode)
    rms = [build_robust_matrices(cs, cfg, regularization) for cs in channel_sets]
    gains = [per_user_gain(rm, cfg) for rm in rms]
    split = optimal_split if mode is AllocationMode.OPTIMAL else fair_split
    alloc = split(gains, cfg.i_limit)
    reports, rerouted = [], []
    for k, rm in enumerate(rms):
        if k in alloc.dropped:
            reports.append(None)
            continue
        rep = bf.closed_form_transmit(rm, cfg, alloc.budgets[k])
        if rep.method is bf.DesignMethod.SDP_FALLBACK:
            rerouted.append(k)
        reports.append(rep)
    return Case1Design(alloc, tuple(reports), tuple(rerouted))
