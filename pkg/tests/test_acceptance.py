"""Acceptance criteria at full size; one PASS/FAIL line per criterion.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines live; they
are also emitted in the terminal summary.
"""

import pytest

from cogbeam import verify

RESULTS = {}


def _run(name, fn, **kw):
    result = verify._timed(name, fn, **kw)
    RESULTS[name] = result
    print('\n' + result.line())
    return result


def test_1_closed_form_vs_brute_force():
    r = _run('1 closed form vs brute force', verify.closed_form_vs_brute_force,
             n_instances=100, n_samples=10 ** 6)
    assert r.passed, r.detail
    assert r.seconds <= 120


def test_2_sdp_agreement_and_rank_one():
    r = _run('2 SDP agreement and rank one', verify.sdp_agreement, n_instances=100)
    assert r.passed, r.detail


def test_3_robust_bound_validity():
    r = _run('3 robust bound validity', verify.robust_bounds, n_designs=50, n_draws=10 ** 4)
    assert r.passed, r.detail


def test_4_receive_beamformer_optimality():
    r = _run('4 receive beamformer optimality', verify.receiver_optimality,
             n_instances=50, n_draws=10 ** 5)
    assert r.passed, r.detail


def test_5_optimal_split():
    r = _run('5 optimal split', verify.optimal_split_oracle, n_instances=100,
             grid_points=10 ** 4)
    assert r.passed, r.detail


def test_6_fair_split():
    r = _run('6 fair split', verify.fair_split_oracle, n_instances=1000)
    assert r.passed, r.detail


def test_7_trend_reproduction():
    r = _run('7 trend reproduction', verify.trend_reproduction, trials_outer=100,
             trials_inner=100, time_limit=600.0)
    assert r.passed, r.detail


def test_8_case2_alternation():
    r = _run('8 Case-2 alternation', verify.case2_alternation, n_monotone=10, n_oracle=5,
             n_samples=10 ** 6)
    assert r.passed, r.detail
