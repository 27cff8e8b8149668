"""Oracle checks behind the acceptance suite and ``cogbeam verify``.

Each check returns a ``CheckResult``; sizes are parameters so the CLI can
run reduced versions while the test suite runs the full ones.
"""

import itertools
import time
from dataclasses import dataclass, replace

import numpy as np

from . import beamformer as bf
from .channel import (SystemConfig, UncertaintyModel, build_robust_matrices,
                      sample_ball, sample_channels, sample_multiuser_channels, sample_sphere)
from .harness import Scenario, default_presets, run_campaign
from .multiuser import fair_split, optimal_split
from .sdp.case2 import solve_case2
from .sdp.solver import SdpProblem, extract_rank_one, solve

__all__ = ['CheckResult', 'FULL', 'QUICK', 'run_all', 'CHECKS']


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(name, fn, **kw):
    t0 = time.perf_counter()
    passed, detail = fn(**kw)
    return CheckResult(name, bool(passed), detail, time.perf_counter() - t0)


def _cfg(nt, nr, i_limit=10 ** 0.5):
    return SystemConfig(nt=nt, nr=nr, p_su=100.0, p_pu=100.0, noise_power=1.0, i_limit=i_limit)


def _quad(X, M):
    # row-wise x^H M x for stacked rows x
    return np.real(np.einsum('ki,ij,kj->k', X.conj(), M, X))


def _best_scaled(rm, cfg, budget, n_samples, rng, chunk=250_000):
    """Max of ``w^H A w`` over random directions scaled to the feasible edge."""
    nt = rm.A.shape[0]
    best = 0.0
    left = n_samples
    while left > 0:
        k = min(chunk, left)
        left -= k
        d = sample_sphere(rng, nt, size=k)
        scale2 = np.minimum(1.0, (budget / cfg.p_su) / _quad(d, rm.B))
        best = max(best, float(np.max(scale2 * _quad(d, rm.A))))
    return best


def closed_form_vs_brute_force(n_instances=100, n_samples=10 ** 6, seed=11):
    rng = np.random.default_rng(seed)
    worst = np.inf
    for i in range(n_instances):
        e = (0.5, 1.0, 2.0)[i % 3]
        cfg = _cfg(2, 2)
        cs = sample_channels(cfg, UncertaintyModel(e), np.random.SeedSequence(seed, spawn_key=(i,)))
        rm = build_robust_matrices(cs, cfg)
        rep = bf.closed_form_transmit(rm, cfg)
        brute = _best_scaled(rm, cfg, cfg.i_limit, n_samples, rng)
        worst = min(worst, (rep.worst_case_sinr - brute) / brute)
    return worst >= -1e-6, f"min relative margin over brute force {worst:.3e}"


def sdp_agreement(n_instances=100, seed=12):
    worst_rel = worst_defect = worst_gap = 0.0
    for i in range(n_instances):
        e = (0.5, 1.0, 2.0)[i % 3]
        cfg = _cfg(5, 5)
        cs = sample_channels(cfg, UncertaintyModel(e), np.random.SeedSequence(seed, spawn_key=(i,)))
        rm = build_robust_matrices(cs, cfg)
        rep = bf.closed_form_transmit(rm, cfg)
        sol = solve(SdpProblem(rm.A, [(rm.B, cfg.i_limit / cfg.p_su), (np.eye(5), 1.0)]))
        worst_rel = max(worst_rel, abs(sol.objective_value - rep.worst_case_sinr)
                        / rep.worst_case_sinr)
        worst_defect = max(worst_defect, extract_rank_one(sol).defect)
        worst_gap = max(worst_gap, abs(sol.duality_gap))
    ok = worst_rel <= 1e-5 and worst_defect <= 1e-6 and worst_gap <= 1e-6
    return ok, (f"max rel diff {worst_rel:.2e}, max defect {worst_defect:.2e}, "
                f"max gap {worst_gap:.2e}")


def robust_bounds(n_designs=50, n_draws=10 ** 4, seed=13):
    rng = np.random.default_rng(seed)
    pu_viol = sinr_viol = 0
    for i in range(n_designs):
        e = (0.5, 1.0, 2.0)[i % 3]
        u = UncertaintyModel(e, sigma=1.0, sigma_prime=1.0)
        cfg = _cfg(5, 5, i_limit=10 ** (rng.uniform(-1.0, 2.0)))
        cs = sample_channels(cfg, u, np.random.SeedSequence(seed, spawn_key=(i,)))
        rep = bf.closed_form_transmit(build_robust_matrices(cs, cfg), cfg)
        half = n_draws // 2
        # half in the ball, half on its boundary sphere where the bound is tightest
        d = np.vstack([sample_ball(rng, 5, size=half), sample_sphere(rng, 5, size=n_draws - half)])
        dp = np.vstack([sample_ball(rng, 5, size=half), sample_sphere(rng, 5, size=n_draws - half)])
        sinr, _, pu = bf.realized_batch(cfg, cs.H_s, rep.pair, cs.h0 + u.radius_tx * d,
                                        cs.h0_prime + u.radius_rx * dp)
        pu_viol += int(np.count_nonzero(pu > cfg.i_limit * (1.0 + 1e-10)))
        sinr_viol += int(np.count_nonzero(sinr < rep.worst_case_sinr * (1.0 - 1e-10)))
    return pu_viol == 0 and sinr_viol == 0, (f"{pu_viol} PU violations, {sinr_viol} SINR "
                                             f"violations over {n_designs * n_draws} draws")


def receiver_optimality(n_instances=50, n_draws=10 ** 5, seed=14):
    rng = np.random.default_rng(seed)
    worst = np.inf
    for i in range(n_instances):
        cfg = _cfg(5, 5)
        cs = sample_channels(cfg, UncertaintyModel(1.0), np.random.SeedSequence(seed, spawn_key=(i,)))
        rm = build_robust_matrices(cs, cfg)
        w1 = sample_sphere(rng, 5) * rng.uniform(0.1, 1.0)
        w2 = bf.receive_beamformer(rm, w1)
        v = rm.H_s @ w1
        best = cfg.p_su * abs(np.vdot(w2, v)) ** 2 / np.real(np.vdot(w2, rm.D @ w2))
        W2 = sample_sphere(rng, 5, size=n_draws)
        vals = cfg.p_su * np.abs(W2.conj() @ v) ** 2 / _quad(W2, rm.D)
        worst = min(worst, (best - vals.max()) / best)
    return worst >= -1e-12, f"min relative margin over random receivers {worst:.3e}"


def _simplex_grid(n_users, total, target_points):
    m = 1
    while len(list(itertools.combinations(range(m + n_users - 1), n_users - 1))) < target_points:
        m += 1
    pts = []
    for bars in itertools.combinations(range(m + n_users - 1), n_users - 1):
        parts = np.diff(np.concatenate([[-1], bars, [m + n_users - 1]])) - 1
        pts.append(parts)
    return total * np.array(pts, dtype=float) / m


def optimal_split_oracle(n_instances=100, grid_points=10 ** 4, seed=15):
    rng = np.random.default_rng(seed)
    worst_gap = -np.inf
    worst_kkt = 0.0
    drops = 0
    reduced_ok = True
    grids = {}
    for _ in range(n_instances):
        g = 10 ** rng.uniform(-2.0, 2.0, size=3)
        total = 10 ** rng.uniform(-1.5, 1.0)
        res = optimal_split(g, total)
        if total not in grids:
            grids[total] = _simplex_grid(3, total, grid_points)
        grid = grids[total]
        grid_best = float(np.max(np.log2(1.0 + grid * g).sum(axis=1) / 3))
        worst_gap = max(worst_gap, grid_best - res.sum_rate)
        act = list(res.active)
        kkt = np.array([g[k] / (1.0 + res.budgets[k] * g[k]) for k in act])
        worst_kkt = max(worst_kkt, float((kkt.max() - kkt.min()) / kkt.max()))
        if res.dropped:
            drops += 1
            again = optimal_split(g[act], total)
            reduced_ok &= again.budgets == tuple(res.budgets[k] for k in act)
    ok = worst_gap <= 1e-6 and worst_kkt <= 1e-9 and reduced_ok and drops > 0
    return ok, (f"max grid excess {worst_gap:.2e}, KKT spread {worst_kkt:.2e}, "
                f"{drops} instances with drops, reduced re-solve exact: {reduced_ok}")


def fair_split_oracle(n_instances=1000, seed=16):
    rng = np.random.default_rng(seed)
    spread = sum_err = 0.0
    dominated = 0
    for _ in range(n_instances):
        n = int(rng.integers(1, 7))
        g = 10 ** rng.uniform(-2.0, 2.0, size=n)
        total = 10 ** rng.uniform(-1.5, 1.5)
        fair = fair_split(g, total)
        opt = optimal_split(g, total)
        spread = max(spread, max(fair.rates) - min(fair.rates))
        sum_err = max(sum_err, abs(sum(fair.budgets) - total))
        dominated += opt.sum_rate < fair.sum_rate - 1e-12
    ok = spread <= 1e-9 and sum_err <= 1e-9 and dominated == 0
    return ok, (f"max rate spread {spread:.2e}, max budget-sum error {sum_err:.2e}, "
                f"{dominated} cases with fair above optimal")


def trend_reproduction(trials_outer=100, trials_inner=100, seed=1, time_limit=600.0):
    t0 = time.perf_counter()
    out = {}
    for sc in (Scenario.SINGLE_USER_VS_I, Scenario.SINGLE_USER_VS_E, Scenario.MULTIUSER_FAIR,
               Scenario.MULTIUSER_OPTIMAL, Scenario.FAIRNESS_TRACE):
        c = replace(default_presets(sc), trials_outer=trials_outer, trials_inner=trials_inner,
                    seed=seed)
        out[sc] = (c, run_campaign(c))
    elapsed = time.perf_counter() - t0
    vs_i = [r.mean_rate for r in out[Scenario.SINGLE_USER_VS_I][1]]
    vs_e = [r.mean_rate for r in out[Scenario.SINGLE_USER_VS_E][1]]
    increasing = all(b > a for a, b in zip(vs_i, vs_i[1:]))
    nonincreasing = all(b <= a for a, b in zip(vs_e, vs_e[1:]))
    below = True
    for sc, (c, rows) in out.items():
        for r in rows:
            limit = c.cfg.i_limit if sc in (Scenario.SINGLE_USER_VS_E, Scenario.FAIRNESS_TRACE) \
                else 10 ** (r.sweep_value / 10)
            below &= r.mean_pu_interference <= limit and r.violation_count == 0
    c, trace = out[Scenario.FAIRNESS_TRACE]
    n = c.cfg.n_sec
    fair_spread = max(max(r.per_user_rates[:n]) - min(r.per_user_rates[:n]) for r in trace)
    opt_spread = max(max(r.per_user_rates[n:]) - min(r.per_user_rates[n:]) for r in trace)
    ok = (increasing and nonincreasing and below and fair_spread <= 1e-9 and opt_spread > 0
          and elapsed <= time_limit)
    return ok, (f"I-sweep increasing: {increasing}, e-sweep nonincreasing: {nonincreasing}, "
                f"PU interference below limit: {below}, fair spread {fair_spread:.1e}, "
                f"optimal spread {opt_spread:.3f}, campaign {elapsed:.0f}s")


def _joint_oracle(rms, cfg, i_prime, n_samples, rng, chunk=200_000):
    """Random search over both users' transmit vectors, each scaled to its
    feasible edge, with matched receivers; cross caps enforced."""
    n_users = len(rms)
    budget = cfg.i_limit / n_users / cfg.p_su
    best = 0.0
    left = n_samples
    while left > 0:
        k = min(chunk, left)
        left -= k
        W1 = []
        for rm in rms:
            d = sample_sphere(rng, rm.A.shape[0], size=k)
            W1.append(d * np.sqrt(np.minimum(1.0, budget / _quad(d, rm.B)))[:, None])
        total = np.zeros(k)
        ok = np.ones(k, dtype=bool)
        for K, rm in enumerate(rms):
            total += np.log2(1.0 + _quad(W1[K], rm.A))
            # receive vectors D^-1 H w1, one per sample
            W2 = np.linalg.solve(rm.D, rm.H_s @ W1[K].T).T
            W2 /= np.linalg.norm(W2, axis=1, keepdims=True)
            for J in range(n_users):
                if J != K:
                    leak = cfg.p_su * np.abs(np.sum(W2.conj() * (W1[J] @ rm.H_s.T), axis=1)) ** 2
                    ok &= leak <= i_prime
        if np.any(ok):
            best = max(best, float(total[ok].max()))
    return best


def case2_alternation(n_monotone=10, n_oracle=5, n_samples=10 ** 6, seed=17):
    rng = np.random.default_rng(seed)
    u = UncertaintyModel(1.0)
    monotone = True
    for i in range(n_monotone):
        n_users = 2 + i % 2
        cfg = replace(_cfg(5, 5), n_sec=n_users)
        chs = sample_multiuser_channels(cfg, u, np.random.SeedSequence(seed, spawn_key=(i,)))
        res = solve_case2(chs, cfg, i_prime=10 ** rng.uniform(-3.0, 0.0))
        monotone &= all(b >= a for a, b in zip(res.history, res.history[1:]))
    single_err = 0.0
    for i in range(5):
        cfg = _cfg(5, 5)
        cs = sample_channels(cfg, u, np.random.SeedSequence(seed, spawn_key=(100 + i,)))
        solo = bf.closed_form_transmit(build_robust_matrices(cs, cfg), cfg)
        res = solve_case2([cs], cfg, i_prime=1.0)
        single_err = max(single_err,
                         abs(res.reports[0].worst_case_sinr - solo.worst_case_sinr)
                         / solo.worst_case_sinr,
                         float(np.linalg.norm(res.reports[0].pair.w1 - solo.pair.w1)))
    worst_ratio = np.inf
    for i in range(n_oracle):
        cfg = replace(_cfg(2, 2), n_sec=2)
        i_prime = 1e3
        chs = sample_multiuser_channels(cfg, u, np.random.SeedSequence(seed, spawn_key=(200 + i,)))
        res = solve_case2(chs, cfg, i_prime=i_prime)
        rms = [build_robust_matrices(cs, cfg) for cs in chs]
        oracle = _joint_oracle(rms, cfg, i_prime, n_samples, rng)
        worst_ratio = min(worst_ratio, 1.0 - abs(res.sum_rate - oracle) / oracle)
    ok = monotone and single_err <= 1e-8 and worst_ratio >= 0.95
    return ok, (f"monotone: {monotone}, single-user deviation {single_err:.1e}, "
                f"worst ratio to joint search {worst_ratio:.4f}")


CHECKS = [
    ('1 closed form vs brute force', closed_form_vs_brute_force),
    ('2 SDP agreement and rank one', sdp_agreement),
    ('3 robust bound validity', robust_bounds),
    ('4 receive beamformer optimality', receiver_optimality),
    ('5 optimal split', optimal_split_oracle),
    ('6 fair split', fair_split_oracle),
    ('7 trend reproduction', trend_reproduction),
    ('8 Case-2 alternation', case2_alternation),
]

FULL = {}
# reduced sizes for a quick command-line pass
QUICK = {
    closed_form_vs_brute_force: dict(n_instances=10, n_samples=10 ** 5),
    sdp_agreement: dict(n_instances=10),
    robust_bounds: dict(n_designs=10, n_draws=2000),
    receiver_optimality: dict(n_instances=10, n_draws=10 ** 4),
    optimal_split_oracle: dict(n_instances=20, grid_points=2000),
    fair_split_oracle: dict(n_instances=200),
    trend_reproduction: dict(trials_outer=10, trials_inner=20),
    case2_alternation: dict(n_monotone=3, n_oracle=1, n_samples=10 ** 5),
}


def run_all(quick=False):
    results = []
    for name, fn in CHECKS:
        kw = QUICK.get(fn, {}) if quick else FULL.get(fn, {})
        results.append(_timed(name, fn, **kw))
    return results
