from dataclasses import replace

import numpy as np
import pytest

from cogbeam.beamformer import DesignMethod, closed_form_transmit
from cogbeam.channel import (ChannelSet, SystemConfig, UncertaintyModel, build_robust_matrices,
                             sample_channels, sample_multiuser_channels)
from cogbeam.errors import SdpError, ValidationError
from cogbeam.multiuser import design_case1
from cogbeam.sdp import case2
from cogbeam.sdp.case2 import cross_interference, realized_case2, solve_case2


def desk_cfg(n_users, nt=2, nr=2):
    return SystemConfig(nt=nt, nr=nr, p_su=100.0, p_pu=100.0, noise_power=1.0,
                        i_limit=10 ** 0.5, n_sec=n_users)


def test_single_user_reduces_to_closed_form(cfg55, unc):
    for seed in range(3):
        cs = sample_channels(cfg55, unc, 500 + seed)
        solo = closed_form_transmit(build_robust_matrices(cs, cfg55), cfg55)
        res = solve_case2([cs], cfg55, i_prime=1.0)
        rep = res.reports[0]
        assert rep.worst_case_sinr == pytest.approx(solo.worst_case_sinr, rel=1e-8)
        np.testing.assert_allclose(rep.pair.w1, solo.pair.w1, atol=1e-8)
        np.testing.assert_allclose(rep.pair.w2, solo.pair.w2, atol=1e-8)


def test_orthogonal_users_keep_solo_designs():
    u = UncertaintyModel(1.0)
    cfg = SystemConfig(nt=4, nr=2, p_su=100, p_pu=100, noise_power=1, i_limit=2.0, n_sec=2)
    rng = np.random.default_rng(4)
    H1 = np.hstack([np.eye(2), np.zeros((2, 2))])
    H2 = np.hstack([np.zeros((2, 2)), np.diag([2.0, 0.5])])
    z = np.zeros(4, complex)
    chs = []
    for H in (H1, H2):
        hp = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        chs.append(ChannelSet(H, z, hp, z, hp, u))
    res = solve_case2(chs, cfg, i_prime=1e-6)
    off = res.cross - np.diag(np.diag(res.cross))
    assert np.abs(off).max() <= 1e-12
    for cs, rep in zip(chs, res.reports):
        solo = closed_form_transmit(build_robust_matrices(cs, cfg), cfg, cfg.i_limit / 2)
        assert rep.worst_case_sinr == pytest.approx(solo.worst_case_sinr, rel=1e-8)


@pytest.mark.parametrize('seed', range(4))
def test_beats_case1_when_cross_cap_generous(seed):
    cfg = desk_cfg(2)
    chs = sample_multiuser_channels(cfg, UncertaintyModel(1.0), 600 + seed)
    res = solve_case2(chs, cfg, i_prime=1e3)
    case1 = design_case1(chs, cfg, 'optimal').allocation.sum_rate
    assert res.sum_rate >= case1


@pytest.mark.parametrize('n_users,i_prime', [(2, 1e-2), (3, 1e-1), (3, 1e-4), (2, 1.0)])
def test_history_monotone_and_constraints_hold(cfg55, unc, n_users, i_prime):
    cfg = replace(cfg55, n_sec=n_users)
    for seed in range(3):
        chs = sample_multiuser_channels(cfg, unc, 700 + seed)
        res = solve_case2(chs, cfg, i_prime)
        assert res.history, "no cross-feasible iterate"
        assert all(b >= a for a, b in zip(res.history, res.history[1:]))
        assert res.sum_rate == pytest.approx(res.history[-1], rel=1e-12)
        off = res.cross - np.diag(np.diag(res.cross))
        assert off.max() <= i_prime * (1 + 1e-9)
        for rep in res.reports:
            assert rep.robust_interference_bound <= cfg.i_limit / n_users * (1 + 1e-8)
            assert np.linalg.norm(rep.pair.w1) <= 1 + 1e-10
        if res.rounds:
            assert all(r.method is DesignMethod.SDP_CASE2 for r in res.reports)


def test_round_cap_reported(cfg55, unc):
    cfg = replace(cfg55, n_sec=2)
    chs = sample_multiuser_channels(cfg, unc, 0)
    res = solve_case2(chs, cfg, 1e-2, max_rounds=2)
    assert res.rounds <= 2
    res0 = solve_case2(chs, cfg, 1e-2, max_rounds=0)
    assert res0.rounds == 0 and not res0.converged


def test_validation(cfg55, unc):
    cs = sample_channels(cfg55, unc, 1)
    with pytest.raises(ValidationError):
        solve_case2([], cfg55, 1.0)
    with pytest.raises(ValidationError):
        solve_case2([cs], cfg55, 0.0)


def test_sdp_failure_is_reported_per_user(cfg55, unc, monkeypatch):
    def boom(problem):
        raise SdpError("forced", status='numerical')
    monkeypatch.setattr(case2, 'solve', boom)
    cfg = replace(cfg55, n_sec=2)
    chs = sample_multiuser_channels(cfg, unc, 2)
    res = solve_case2(chs, cfg, 1e3)
    assert res.rounds == 0
    assert res.status == ['sdp_error', 'sdp_error']
    assert res.history and res.converged


def test_realized_case2_includes_cross_terms(cfg55, unc):
    cfg = replace(cfg55, n_sec=2)
    chs = sample_multiuser_channels(cfg, unc, 3)
    res = solve_case2(chs, cfg, 1.0)
    sinr, pu = realized_case2(chs, res.pairs, cfg)
    assert sinr.shape == (2, 1) and pu.shape == (1,)
    rms = [build_robust_matrices(cs, cfg) for cs in chs]
    C = cross_interference(rms, res.pairs, cfg.p_su)
    for k, (cs, pr) in enumerate(zip(chs, res.pairs)):
        den = (cfg.p_pu * abs(np.vdot(pr.w2, cs.h_prime_true)) ** 2 + cfg.noise_power
               + C[k, 1 - k])
        assert sinr[k, 0] == pytest.approx(C[k, k] / den, rel=1e-10)
    expect = sum(cfg.p_su * abs(np.vdot(chs[0].h_true, pr.w1)) ** 2 for pr in res.pairs)
    assert pu[0] == pytest.approx(expect, rel=1e-10)
    assert pu[0] <= cfg.i_limit * (1 + 1e-10)
