from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cogbeam.beamformer import DesignMethod, closed_form_transmit
from cogbeam.channel import RobustMatrices, build_robust_matrices, sample_channels, sample_multiuser_channels
from cogbeam.errors import ConditioningError, ValidationError
from cogbeam.multiuser import (AllocationMode, case1_sum_rate, design_case1, fair_split,
                               optimal_split, per_user_gain)

gain_lists = st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=6)
limits = st.floats(1e-2, 1e2)


def manual(A, B):
    n = len(A)
    return RobustMatrices(A=np.asarray(A, complex), B=np.asarray(B, complex), D=np.eye(n),
                          H_s=np.eye(n), margin_tx=0.0, margin_rx=0.0)


def test_gain_trivial(cfg55):
    cfg = replace(cfg55, nt=2, nr=2, p_su=1.0)
    assert per_user_gain(manual(2 * np.eye(2), np.eye(2)), cfg) == pytest.approx(2.0)
    A = np.diag([3.0, 1.0])
    base = per_user_gain(manual(A, np.eye(2)), cfg)
    assert per_user_gain(manual(4 * A, np.eye(2)), cfg) == pytest.approx(4 * base)
    with pytest.raises(ConditioningError):
        per_user_gain(manual(A, np.diag([1.0, 0.0])), cfg)


def test_gain_consistent_with_single_user_design(cfg55, unc):
    rm = build_robust_matrices(sample_channels(cfg55, unc, 31), cfg55)
    y = per_user_gain(rm, cfg55)
    for budget in (0.05, 0.5, 2.0):
        rep = closed_form_transmit(rm, cfg55, budget)
        assert rep.method is DesignMethod.CLOSED_FORM
        assert rep.worst_case_sinr == pytest.approx(budget * y, rel=1e-8)


def test_optimal_examples():
    res = optimal_split([1.0, 1.0], 2.0)
    np.testing.assert_allclose(res.budgets, [1.0, 1.0])
    res = optimal_split([2.0, 1.0], 3.0)
    np.testing.assert_allclose(res.budgets, [1.75, 1.25])
    np.testing.assert_allclose(res.rates, [np.log2(4.5), np.log2(2.25)])
    assert res.mode is AllocationMode.OPTIMAL and res.dropped == ()


def test_optimal_matches_line_search():
    t = np.arange(0, 30001) * 1e-4
    grid = np.max(np.log2(1 + 2 * t) + np.log2(1 + (3 - t)))
    assert optimal_split([2.0, 1.0], 3.0).sum_rate * 2 >= grid - 1e-9


def test_optimal_drops_negative_budget():
    res = optimal_split([10.0, 0.01], 0.1)
    assert 0.5 * (0.1 + 0.1 + 100.0) - 100.0 < 0
    assert res.dropped == (1,)
    assert res.budgets == (0.1, 0.0)
    assert res.rates[1] == 0.0
    assert res.sum_rate == pytest.approx(np.log2(1 + 1.0) / 2)


def test_fair_examples():
    np.testing.assert_allclose(fair_split([1.0, 1.0], 2.0).budgets, [1.0, 1.0])
    res = fair_split([2.0, 1.0], 3.0)
    np.testing.assert_allclose(res.budgets, [1.0, 2.0])
    np.testing.assert_allclose(res.rates, [np.log2(3)] * 2)
    res = fair_split([4.0, 2.0, 1.0], 7.0)
    np.testing.assert_allclose(res.budgets, [1.0, 2.0, 4.0])
    np.testing.assert_allclose(np.array(res.budgets) * res.gains, 4.0)


def test_case1_sum_rate_examples():
    res = fair_split([1.0], 1.0)
    assert case1_sum_rate(res, 1) == pytest.approx(1.0)
    fair = fair_split([2.0, 1.0], 3.0)
    assert case1_sum_rate(fair, 2) == pytest.approx(np.log2(3))
    assert case1_sum_rate(optimal_split([2.0, 1.0], 3.0), 2) >= case1_sum_rate(fair, 2)
    with pytest.raises(ValidationError):
        case1_sum_rate(fair, 0)


def test_input_validation():
    for bad in ([], [1.0, 0.0], [1.0, -2.0], [np.nan]):
        with pytest.raises(ValidationError):
            optimal_split(bad, 1.0)
    with pytest.raises(ValidationError):
        fair_split([1.0], 0.0)


@settings(max_examples=200, deadline=None)
@given(gain_lists, limits)
def test_optimal_invariants(gains, total):
    res = optimal_split(gains, total)
    act = res.active
    assert act
    assert sum(res.budgets[k] for k in act) == pytest.approx(total, rel=1e-9)
    assert all(res.budgets[k] > 0 for k in act)
    assert all(res.budgets[k] == 0 for k in res.dropped)
    kkt = [res.gains[k] / (1 + res.budgets[k] * res.gains[k]) for k in act]
    assert max(kkt) - min(kkt) <= 1e-9 * max(kkt)
    # dropped users would not gain from any budget at the common water level
    for k in res.dropped:
        assert res.gains[k] <= max(kkt) * (1 + 1e-9)
    assert res.sum_rate == pytest.approx(case1_sum_rate(res, len(gains)), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(gain_lists, limits)
def test_reduced_resolve_is_exact(gains, total):
    res = optimal_split(gains, total)
    again = optimal_split([gains[k] for k in res.active], total)
    assert again.budgets == tuple(res.budgets[k] for k in res.active)
    assert again.dropped == ()


@settings(max_examples=200, deadline=None)
@given(gain_lists, limits)
def test_fair_invariants_and_dominance(gains, total):
    fair = fair_split(gains, total)
    assert max(fair.rates) - min(fair.rates) <= 1e-9
    assert abs(sum(fair.budgets) - total) <= 1e-9 * max(1.0, total)
    assert fair.dropped == ()
    assert optimal_split(gains, total).sum_rate >= fair.sum_rate - 1e-12


@pytest.mark.parametrize('seed', range(5))
def test_optimal_beats_simplex_grid(seed):
    rng = np.random.default_rng(seed)
    g = 10 ** rng.uniform(-1, 1, 3)
    total = 2.0
    m = 140
    i, j = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing='ij')
    mask = i + j <= m
    pts = np.stack([i[mask], j[mask], m - i[mask] - j[mask]], axis=1) * total / m
    grid = np.max(np.log2(1 + pts * g).sum(axis=1) / 3)
    assert optimal_split(g, total).sum_rate >= grid - 1e-6


@pytest.mark.parametrize('mode', list(AllocationMode))
def test_design_case1(cfg55, unc, mode):
    cfg = replace(cfg55, n_sec=3)
    chs = sample_multiuser_channels(cfg, unc, 32)
    design = design_case1(chs, cfg, mode)
    alloc = design.allocation
    assert alloc.mode is mode
    for k, rep in enumerate(design.reports):
        if k in alloc.dropped:
            assert rep is None
            continue
        assert rep.robust_interference_bound <= alloc.budgets[k] * (1 + 1e-9)
        if rep.method is DesignMethod.CLOSED_FORM:
            assert rep.worst_case_sinr == pytest.approx(alloc.budgets[k] * alloc.gains[k],
                                                        rel=1e-8)
    total = sum(r.robust_interference_bound for r in design.reports if r is not None)
    assert total <= cfg.i_limit * (1 + 1e-9)
    if mode is AllocationMode.FAIR:
        rates = design.design_rates
        assert max(rates) - min(rates) <= 1e-9


def test_design_case1_reroutes_when_norm_cap_binds(cfg55, unc):
    cfg = replace(cfg55, n_sec=2, p_su=1.0, i_limit=50.0)
    chs = sample_multiuser_channels(cfg, unc, 33)
    design = design_case1(chs, cfg, 'optimal')
    assert design.rerouted
    for k in design.rerouted:
        rep = design.reports[k]
        assert rep.method is DesignMethod.SDP_FALLBACK
        assert np.linalg.norm(rep.pair.w1) <= 1 + 1e-10
