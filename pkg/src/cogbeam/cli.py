"""Command-line driver: ``cogbeam run | presets | verify``."""

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from .channel import SystemConfig, UncertaintyModel, db_to_linear
from .errors import CampaignAborted, CogbeamError
from .harness import (SWEEP_UNITS, Campaign, Scenario, default_presets, per_user_labels,
                      run_campaign, write_csv)

CONFIG_KEYS = ('nt', 'nr', 'p_su_db', 'p_pu_db', 'i_limit_db', 'noise_db', 'n_sec', 'e',
               'sigma', 'sigma_prime', 'i_prime_db')
INT_KEYS = ('nt', 'nr', 'n_sec')


def parse_sweep(text):
    """``start:stop:step`` with ``stop`` included when on the grid."""
    try:
        start, stop, step = (float(x) for x in text.split(':'))
    except ValueError:
        raise argparse.ArgumentTypeError(f"sweep must be start:stop:step, got {text!r}")
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("sweep needs step > 0 and stop >= start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + k * step for k in range(n))


def parse_trials(text):
    try:
        outer, inner = (int(x) for x in text.lower().split('x'))
    except ValueError:
        raise argparse.ArgumentTypeError(f"trials must look like 100x100, got {text!r}")
    if outer < 1 or inner < 1:
        raise argparse.ArgumentTypeError("trial counts must be >= 1")
    return outer, inner


def read_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split('=', 1))
            if key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = int(val) if key in INT_KEYS else float(val)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad value for {key}: {val!r}")
    return values


def apply_config(campaign, values):
    cfg, u = campaign.cfg, campaign.uncertainty
    direct = {k: values[k] for k in INT_KEYS if k in values}
    for key, field in (('p_su_db', 'p_su'), ('p_pu_db', 'p_pu'), ('i_limit_db', 'i_limit'),
                       ('noise_db', 'noise_power'), ('i_prime_db', 'i_prime')):
        if key in values:
            direct[field] = float(db_to_linear(values[key]))
    cfg = SystemConfig(**{**cfg.__dict__, **direct})
    u = UncertaintyModel(**{**u.__dict__,
                            **{k: values[k] for k in ('e', 'sigma', 'sigma_prime') if k in values}})
    return replace(campaign, cfg=cfg, uncertainty=u)


def _cmd_run(args):
    c = default_presets(args.scenario)
    if args.config:
        c = apply_config(c, read_config(args.config))
    outer, inner = args.trials
    c = replace(c, trials_outer=outer, trials_inner=inner, seed=args.seed)
    if args.sweep is not None:
        c = replace(c, sweep=args.sweep)
    rows = run_campaign(c)
    n = c.cfg.n_sec
    labels = per_user_labels(c.scenario, n) if rows and rows[0].per_user_rates else None
    write_csv(rows, args.out, labels)
    failed = sum(r.failures for r in rows)
    print(f"wrote {len(rows)} rows to {args.out}"
          + (f" ({failed} failed trials skipped)" if failed else ""))
    return 0


def _cmd_presets(args):
    c = default_presets()
    cfg, u = c.cfg, c.uncertainty
    print(f"nt = {cfg.nt}")
    print(f"nr = {cfg.nr}")
    print(f"p_su_db = {10 * np.log10(cfg.p_su):g}")
    print(f"p_pu_db = {10 * np.log10(cfg.p_pu):g}")
    print(f"noise_db = {10 * np.log10(cfg.noise_power):g}")
    print(f"i_limit_db = {10 * np.log10(cfg.i_limit):g}")
    print(f"n_sec = {cfg.n_sec}")
    print(f"e = {u.e:g}")
    print(f"sigma = {u.sigma:g}")
    print(f"sigma_prime = {u.sigma_prime:g}")
    print(f"i_prime_db = {10 * np.log10(cfg.i_prime):g}")
    print(f"trials = {c.trials_outer}x{c.trials_inner}")
    print("scenarios:")
    for sc in Scenario:
        sweep = default_presets(sc).sweep
        print(f"  {sc.value}: sweep {SWEEP_UNITS[sc]} {sweep[0]:g} .. {sweep[-1]:g} "
              f"({len(sweep)} points)")
    return 0


def _cmd_verify(args):
    from .verify import run_all
    results = run_all(quick=not args.full)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser():
    p = argparse.ArgumentParser(prog='cogbeam',
                                description='Robust cognitive-radio MIMO beamforming simulator')
    p.add_argument('-v', '--verbose', action='store_true', help='log per-trial failures')
    sub = p.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='run a Monte Carlo campaign and write CSV')
    run.add_argument('--scenario', required=True, choices=[s.value for s in Scenario])
    run.add_argument('--sweep', type=parse_sweep, default=None,
                     help='start:stop:step (defaults to the scenario preset)')
    run.add_argument('--trials', type=parse_trials, default=(100, 100),
                     help='OUTERxINNER trial counts (default 100x100)')
    run.add_argument('--seed', type=int, default=1)
    run.add_argument('--config', help='key = value file overriding the presets')
    run.add_argument('--out', required=True, help='output CSV path')
    run.set_defaults(func=_cmd_run)

    pre = sub.add_parser('presets', help='print the default simulation setup')
    pre.set_defaults(func=_cmd_presets)

    ver = sub.add_parser('verify', help='run the oracle checks')
    ver.add_argument('--full', action='store_true', help='use full acceptance sizes')
    ver.set_defaults(func=_cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format='%(levelname)s %(message)s')
    try:
        return args.func(args)
    except CampaignAborted as exc:
        print(f"cogbeam: campaign aborted: {exc}", file=sys.stderr)
        return 3
    except (CogbeamError, ValueError, OSError) as exc:
        print(f"cogbeam: error: {exc}", file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
