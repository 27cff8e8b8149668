"""Monte Carlo campaigns over channel and error realizations.

Outer trials draw nominal channels, inner trials draw true channels inside
the error balls. Streams are split from the campaign seed by trial index
only, so every sweep value sees the same draws.
"""

import csv
import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import beamformer as bf
from .channel import (SystemConfig, UncertaintyModel, build_robust_matrices, db_to_linear,
                      default_regularization, sample_ball, sample_channels,
                      sample_multiuser_channels)
from .errors import CampaignAborted, CogbeamError, ValidationError
from .multiuser import AllocationMode, design_case1
from .sdp.case2 import realized_case2, solve_case2

__all__ = ['Scenario', 'Campaign', 'ResultRow', 'run_campaign', 'default_presets',
           'preset_config', 'write_csv', 'per_user_labels', 'FAILURE_BUDGET']

log = logging.getLogger(__name__)

FAILURE_BUDGET = 0.01
VIOLATION_SLACK = 1e-10


class Scenario(enum.Enum):
    SINGLE_USER_VS_I = 'single_user_vs_I'
    SINGLE_USER_VS_E = 'single_user_vs_e'
    MULTIUSER_FAIR = 'multiuser_fair'
    MULTIUSER_OPTIMAL = 'multiuser_optimal'
    FAIRNESS_TRACE = 'fairness_trace'
    CASE2_SWEEP = 'case2_sweep'


# unit of the sweep variable per scenario
SWEEP_UNITS = {
    Scenario.SINGLE_USER_VS_I: 'I_limit [dB]',
    Scenario.SINGLE_USER_VS_E: 'e [linear]',
    Scenario.MULTIUSER_FAIR: 'I_limit [dB]',
    Scenario.MULTIUSER_OPTIMAL: 'I_limit [dB]',
    Scenario.FAIRNESS_TRACE: 'slot index',
    Scenario.CASE2_SWEEP: "I' [dB]",
}


@dataclass(frozen=True)
class Campaign:
    scenario: Scenario
    sweep: tuple
    trials_outer: int
    trials_inner: int
    seed: int
    cfg: SystemConfig
    uncertainty: UncertaintyModel

    def __post_init__(self):
        object.__setattr__(self, 'scenario', Scenario(self.scenario))
        sweep = tuple(float(v) for v in self.sweep)
        object.__setattr__(self, 'sweep', sweep)
        if not sweep:
            raise ValidationError("sweep must be nonempty")
        if any(b <= a for a, b in zip(sweep, sweep[1:])):
            raise ValidationError("sweep must be strictly increasing")
        if self.trials_outer < 1 or self.trials_inner < 1:
            raise ValidationError("trial counts must be >= 1")
        if self.seed < 0:
            raise ValidationError("seed must be >= 0")
        if self.scenario is Scenario.SINGLE_USER_VS_E and sweep[0] < 0:
            raise ValidationError("e sweep values must be >= 0")


@dataclass(frozen=True)
class ResultRow:
    """Averages for one sweep value; ``failures`` counts skipped outer trials."""
    sweep_value: float
    mean_rate: float
    mean_realized_sinr: float
    mean_pu_interference: float
    violation_count: int
    per_user_rates: tuple = None
    failures: int = field(default=0, compare=False)


def _streams(seed, t):
    outer = np.random.SeedSequence(seed, spawn_key=(t,))
    inner = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(t, 1)))
    return outer, inner


def _regularization(cs):
    return default_regularization(cs.h0) if cs.uncertainty.e == 0 else None


def _single_user_trial(c, cfg, u, t):
    outer, rng = _streams(c.seed, t)
    cs = sample_channels(cfg, u, outer)
    rm = build_robust_matrices(cs, cfg, _regularization(cs))
    pair = bf.closed_form_transmit(rm, cfg).pair
    h = cs.h0 + u.radius_tx * sample_ball(rng, cfg.nt, size=c.trials_inner)
    hp = cs.h0_prime + u.radius_rx * sample_ball(rng, cfg.nr, size=c.trials_inner)
    sinr, rate, pu = bf.realized_batch(cfg, cs.H_s, pair, h, hp)
    return rate, sinr, pu, None


def _inner_multiuser(c, cfg, u, chs, rng):
    h = chs[0].h0 + u.radius_tx * sample_ball(rng, cfg.nt, size=c.trials_inner)
    hps = [cs.h0_prime + u.radius_rx * sample_ball(rng, cfg.nr, size=c.trials_inner)
           for cs in chs]
    return h, hps


def _case1_realized(cfg, chs, design, h, hps, inner):
    n = len(chs)
    rates = np.zeros((n, inner))
    sinrs = np.zeros((n, inner))
    pu = np.zeros(inner)
    for k, (cs, rep) in enumerate(zip(chs, design.reports)):
        if rep is None:
            continue
        s, r, p = bf.realized_batch(cfg, cs.H_s, rep.pair, h, hps[k])
        rates[k], sinrs[k] = r, s
        pu += p
    return rates, sinrs, pu


def _case1_trial(c, cfg, u, t, mode):
    outer, rng = _streams(c.seed, t)
    chs = sample_multiuser_channels(cfg, u, outer)
    design = design_case1(chs, cfg, mode, _regularization(chs[0]))
    h, hps = _inner_multiuser(c, cfg, u, chs, rng)
    rates, sinrs, pu = _case1_realized(cfg, chs, design, h, hps, c.trials_inner)
    return rates.mean(axis=0), sinrs.mean(axis=0), pu, rates.mean(axis=1)


def _fairness_slot(c, cfg, u, slot):
    # one channel draw per slot; per-user columns are the fair then the
    # optimal design rates, the realized columns follow the fair design
    outer, rng = _streams(c.seed, slot)
    chs = sample_multiuser_channels(cfg, u, outer)
    reg = _regularization(chs[0])
    fair = design_case1(chs, cfg, AllocationMode.FAIR, reg)
    opt = design_case1(chs, cfg, AllocationMode.OPTIMAL, reg)
    h, hps = _inner_multiuser(c, cfg, u, chs, rng)
    rates, sinrs, pu = _case1_realized(cfg, chs, fair, h, hps, c.trials_inner)
    per_user = np.concatenate([fair.allocation.rates, opt.allocation.rates])
    return rates.mean(axis=0), sinrs.mean(axis=0), pu, per_user


def _case2_trial(c, cfg, u, t):
    outer, rng = _streams(c.seed, t)
    chs = sample_multiuser_channels(cfg, u, outer)
    res = solve_case2(chs, cfg, cfg.i_prime, regularization=_regularization(chs[0]))
    h, hps = _inner_multiuser(c, cfg, u, chs, rng)
    sinr, pu = realized_case2(chs, res.pairs, cfg, h, hps)
    rates = np.log2(1.0 + sinr)
    return rates.sum(axis=0), sinr.mean(axis=0), pu, rates.mean(axis=1)


def _configure(c, value):
    cfg, u = c.cfg, c.uncertainty
    s = c.scenario
    if s in (Scenario.SINGLE_USER_VS_I, Scenario.MULTIUSER_FAIR, Scenario.MULTIUSER_OPTIMAL):
        cfg = replace(cfg, i_limit=float(db_to_linear(value)))
    elif s is Scenario.SINGLE_USER_VS_E:
        u = replace(u, e=value)
    elif s is Scenario.CASE2_SWEEP:
        cfg = replace(cfg, i_prime=float(db_to_linear(value)))
    return cfg, u


def _trial(c, cfg, u, value, t):
    s = c.scenario
    if s in (Scenario.SINGLE_USER_VS_I, Scenario.SINGLE_USER_VS_E):
        return _single_user_trial(c, cfg, u, t)
    if s is Scenario.MULTIUSER_FAIR:
        return _case1_trial(c, cfg, u, t, AllocationMode.FAIR)
    if s is Scenario.MULTIUSER_OPTIMAL:
        return _case1_trial(c, cfg, u, t, AllocationMode.OPTIMAL)
    if s is Scenario.FAIRNESS_TRACE:
        return _fairness_slot(c, cfg, u, int(round(value)))
    return _case2_trial(c, cfg, u, t)


def run_campaign(c):
    """Run a campaign and return one ``ResultRow`` per sweep value.

    Outer trials that raise a library error are skipped and counted; more
    than 1% skipped at any sweep value aborts the campaign.

    Raises
    ------
    CampaignAborted
    """
    # a fairness slot is a single channel draw
    n_outer = 1 if c.scenario is Scenario.FAIRNESS_TRACE else c.trials_outer
    allowed = math.floor(FAILURE_BUDGET * n_outer)
    rows = []
    for value in c.sweep:
        cfg, u = _configure(c, value)
        rate_sum = sinr_sum = pu_sum = 0.0
        violations = failures = done = 0
        users = None
        for t in range(n_outer):
            try:
                rate, sinr, pu, per_user = _trial(c, cfg, u, value, t)
            except CogbeamError as exc:
                failures += 1
                log.warning("sweep %g trial %d failed: %s", value, t, exc)
                if failures > allowed:
                    raise CampaignAborted(
                        f"{failures} of {n_outer} trials failed at sweep value "
                        f"{value:g}, over the {FAILURE_BUDGET:.0%} budget") from exc
                continue
            done += 1
            rate_sum += float(np.sum(rate))
            sinr_sum += float(np.sum(sinr))
            pu_sum += float(np.sum(pu))
            violations += int(np.count_nonzero(pu > cfg.i_limit * (1.0 + VIOLATION_SLACK)))
            if per_user is not None:
                users = np.array(per_user, dtype=float) if users is None else users + per_user
        count = done * c.trials_inner
        rows.append(ResultRow(
            sweep_value=value,
            mean_rate=rate_sum / count,
            mean_realized_sinr=sinr_sum / count,
            mean_pu_interference=pu_sum / count,
            violation_count=violations,
            per_user_rates=None if users is None else tuple(float(x) for x in users / done),
            failures=failures))
    return rows


def preset_config():
    """Simulation setup: 5x5 antennas, 20 dB powers over 0 dB noise, 5 dB
    interference cap, 3 secondary users."""
    return SystemConfig(nt=5, nr=5, p_su=float(db_to_linear(20.0)),
                        p_pu=float(db_to_linear(20.0)), noise_power=float(db_to_linear(0.0)),
                        i_limit=float(db_to_linear(5.0)), n_sec=3, i_prime=1.0)


_DEFAULT_SWEEPS = {
    Scenario.SINGLE_USER_VS_I: tuple(np.arange(-5.0, 20.0 + 1e-9, 2.5)),
    Scenario.SINGLE_USER_VS_E: tuple(np.arange(0.5, 5.0 + 1e-9, 0.5)),
    Scenario.MULTIUSER_FAIR: tuple(np.arange(-5.0, 20.0 + 1e-9, 2.5)),
    Scenario.MULTIUSER_OPTIMAL: tuple(np.arange(-5.0, 20.0 + 1e-9, 2.5)),
    Scenario.FAIRNESS_TRACE: tuple(float(k) for k in range(20)),
    Scenario.CASE2_SWEEP: tuple(np.arange(-20.0, 10.0 + 1e-9, 5.0)),
}


def default_presets(scenario=Scenario.SINGLE_USER_VS_I):
    """Campaign at the simulation-setup defaults with 1000 x 1000 trials.

    The fairness trace runs at a unit interference cap.
    """
    scenario = Scenario(scenario)
    cfg = preset_config()
    if scenario is Scenario.FAIRNESS_TRACE:
        cfg = replace(cfg, i_limit=1.0)
    return Campaign(scenario=scenario, sweep=_DEFAULT_SWEEPS[scenario], trials_outer=1000,
                    trials_inner=1000, seed=1, cfg=cfg,
                    uncertainty=UncertaintyModel(e=1.0, sigma=1.0, sigma_prime=1.0))


def per_user_labels(scenario, n_users):
    if Scenario(scenario) is Scenario.FAIRNESS_TRACE:
        return ([f'fair_rate_{k}' for k in range(n_users)]
                + [f'optimal_rate_{k}' for k in range(n_users)])
    return [f'rate_{k}' for k in range(n_users)]


HEADER = ['sweep_value', 'mean_rate', 'mean_realized_sinr', 'mean_pu_interference',
          'violation_count']


def write_csv(rows, path, labels=None):
    """Write rows as CSV with LF line endings and floats in ``%.12e``.

    ``labels`` names the per-user columns; defaults to ``rate_<k>``.
    Errors opening or writing ``path`` propagate as ``OSError``.
    """
    width = max((len(r.per_user_rates) for r in rows if r.per_user_rates), default=0)
    if labels is None:
        labels = [f'rate_{k}' for k in range(width)]
    elif len(labels) != width and width:
        raise ValidationError(f"{len(labels)} labels for {width} per-user columns")
    with open(path, 'w', newline='') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(HEADER + list(labels[:width] if width else []))
        for r in rows:
            line = [f'{r.sweep_value:.12e}', f'{r.mean_rate:.12e}',
                    f'{r.mean_realized_sinr:.12e}', f'{r.mean_pu_interference:.12e}',
                    str(r.violation_count)]
            line += [f'{x:.12e}' for x in (r.per_user_rates or ())]
            writer.writerow(line)
