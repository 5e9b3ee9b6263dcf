#! /usr/bin/env python3
# -*- coding: utf-8 -*-
#
# stmrswarm.py: STMR swarm simulation and analysis
# A part of STMR Swarm Tool
#
# Released under BSD 2-clause license.
#
# Subcommands:
#   simulate  run one scenario and export trajectory, switches, metrics
#   compare   run one scenario under several models from the same start
#   stability tabulate bi-agent linearized eigenvalues over a gain grid
#   sweep     run one scenario over seeds 0..K-1 and aggregate end states
#   metrics   recompute metrics of an exported run from its trajectory

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

sys.path.append(os.path.dirname(__file__))
import libexport
import libmetrics
import libswarm
import libtrace
from   libctrl import KINDS, STMR_KINDS
from   libdwell import adt_violations
from   libexport import fmt, write_table
from   libgeom import ConfigError, NumericalError
from   libscenario import load_scenario, with_overrides

try:
    import numpy as np
    import pandas as pd
except ModuleNotFoundError:
    libtrace.err('''\
    This code needs numpy and pandas modules.
    Please install this module such as \"pip install numpy pandas\".
    ''')
    sys.exit(1)

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

MODEL_ALIAS = {
    'stmr'   : 'stmr_pure_pursuit',
    'stmr_pp': 'stmr_pure_pursuit',
    'stmr_mc': 'stmr_motion_camouflage',
}

def model_kind(name):
    kind = MODEL_ALIAS.get(name, name)
    if kind not in KINDS:
        raise ConfigError(f'unknown model name: {name}')
    return kind

def parse_models(text):
    names = [a.strip() for a in (text or '').split(',') if a.strip()]
    if not names:
        raise ConfigError('model list is empty.')
    if len(set(names)) != len(names):
        raise ConfigError(f'duplicate model name in {text}')
    return [(name, model_kind(name)) for name in names]

def parse_range(text, spacing):
    ''' returns grid values of lo:hi:n '''
    try:
        lo, hi, n = text.split(':')
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ConfigError(f'range should be lo:hi:n ({text}).') from None
    if n < 1 or not np.isfinite([lo, hi]).all() or hi < lo:
        raise ConfigError(f'range should have n >= 1 and lo <= hi ({text}).')
    if spacing == 'log':
        if lo <= 0.:
            raise ConfigError(f'log spacing needs positive bounds ({text}).')
        return np.logspace(np.log10(lo), np.log10(hi), n)
    return np.linspace(lo, hi, n)

def _run_job(cfg, metrics=True):
    ''' runs cfg; a numerical failure comes back as a partial result '''
    try:
        return libswarm.run(cfg, metrics)
    except NumericalError as e:
        result = e.partial
        if metrics:
            result.metrics = libmetrics.metrics_series(result.log, cfg)
        return result

def run_all(cfgs, jobs, metrics=True):
    job = partial(_run_job, metrics=metrics)
    if jobs > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(job, cfgs))
    return [job(cfg) for cfg in cfgs]

def summarize(trace, result):
    cfg = result.cfg
    msg = f'{cfg.name} [{cfg.controller.kind}] seed={cfg.seed}: ' \
          f'{result.log.n_snapshots} snapshots'
    if cfg.controller.kind in STMR_KINDS:
        msg += f', {result.accepted_switches} switches accepted, ' \
               f'{len(result.switches) - result.accepted_switches} rejected'
    if result.metrics is not None and len(result.metrics):
        msg += f', final polarization {result.metrics.polarization[-1]:.4f}'
    trace.show(0, msg, fg='red' if result.failure else '')
    if result.failure:
        libtrace.err(f'{cfg.name}: {result.failure}')

def cmd_simulate(args, trace):
    cfg = load_scenario(args.config)
    changes = {}
    if args.no_dwell_enforce:
        changes['dwell.enforce'] = False
    if args.seed is not None:
        changes['seed'] = args.seed
    if args.duration is not None:
        changes['duration'] = args.duration
    if changes:
        cfg = with_overrides(cfg, **changes)
    try:
        result = libswarm.run(cfg, trace=trace)
    except NumericalError as e:
        result = e.partial
        result.metrics = libmetrics.metrics_series(result.log, cfg)
    libexport.write_bundle(result, args.out)
    summarize(trace, result)
    return EXIT_NUMERICAL if result.failure else EXIT_OK

def cmd_compare(args, trace):
    cfg = load_scenario(args.config)
    models = parse_models(args.models)
    if args.single_agent:
        cfg = with_overrides(cfg, single_agent=True)
    cfgs = [with_overrides(cfg, **{'controller.kind': kind}) for _, kind in models]
    results = run_all(cfgs, args.jobs)
    rows = []
    for (name, _), result in zip(models, results):
        libexport.write_bundle(result, os.path.join(args.out, name))
        summarize(trace, result)
        m = result.metrics
        for k in range(len(m)):
            rows.append((name, fmt(m.time_s[k]), fmt(m.polarization[k]),
                         fmt(m.mean_heading[k]), fmt(m.circ_variance[k]),
                         fmt(m.fiedler_instant[k]), fmt(m.fiedler_union[k]),
                         fmt(m.attentional_work[k])))
    write_table(
        os.path.join(args.out, 'compare_metrics.csv'),
        libexport.header_line(cfg, 'models=' + '/'.join(name for name, _ in models)),
        ('model', 'time_s', 'polarization', 'mean_heading_rad', 'circular_variance',
         'fiedler_instant', 'fiedler_union', 'attentional_work'), rows)
    return EXIT_NUMERICAL if any(r.failure for r in results) else EXIT_OK

def cmd_stability(args, trace):
    table = libmetrics.stability_table(
        parse_range(args.ka, args.spacing), parse_range(args.alpha, args.spacing))
    header = f'# stmrswarm {libexport.VERSION} stability spacing={args.spacing}'
    columns = ('K_a', 'alpha', 're1', 'im1', 're2', 'im2', 'stable')
    rows = [tuple(fmt(a) for a in row) for row in table]
    if args.output:
        write_table(args.output, header, columns, rows)
    else:
        print(header)
        print(','.join(columns))
        for row in rows:
            print(','.join(row))
    n_stable = sum(1 for row in table if row[-1])
    trace.show(0, f'stability: {n_stable} of {len(table)} grid points stable')
    return EXIT_OK

def sweep_row(result):
    cfg = result.cfg
    log = result.log
    _, var0 = libmetrics.circular_mean_and_variance(log.theta[0])
    _, var1 = libmetrics.circular_mean_and_variance(log.theta[-1])
    violations = sum(
        adt_violations(ledger.switch_times, cfg.dwell, cfg.dwell.window, ledger.window_start)
        for ledger in result.ledgers if ledger is not None)
    return {
        'seed'                 : cfg.seed,
        'initial_circ_variance': var0,
        'final_circ_variance'  : var1,
        'final_polarization'   : libmetrics.polarization(log.theta[-1]),
        'switches_accepted'    : result.accepted_switches,
        'adt_violations'       : violations,
        'variance_decreased'   : bool(var1 < var0),
        'failed'               : bool(result.failure),
    }

def cmd_sweep(args, trace):
    cfg = load_scenario(args.config)
    if args.seeds < 1:
        raise ConfigError(f'seed count should be 1 or more ({args.seeds}).')
    results = run_all([with_overrides(cfg, seed=s) for s in range(args.seeds)], args.jobs,
                      metrics=False)
    for result in results:
        summarize(trace, result)
    df = pd.DataFrame([sweep_row(r) for r in results])
    stats = df.drop(columns='seed').agg(['mean', 'min', 'max'])
    os.makedirs(args.out, exist_ok=True)
    header = libexport.header_line(cfg, f'seeds={args.seeds}')
    columns = tuple(df.columns)
    rows = [tuple(fmt(row[c]) for c in columns) for row in df.to_dict('records')]
    rows.append(('aggregate',) + tuple(fmt(stats.loc['mean', c]) for c in columns[1:]))
    write_table(os.path.join(args.out, 'sweep.csv'), header, columns, rows)
    write_table(os.path.join(args.out, 'aggregate.csv'), header,
                ('statistic',) + columns[1:],
                [(s,) + tuple(fmt(stats.loc[s, c]) for c in columns[1:])
                 for s in ('mean', 'min', 'max')])
    trace.show(0, f'sweep: final circular variance decreased in '
                  f'{int(df["variance_decreased"].sum())} of {args.seeds} seeds')
    return EXIT_NUMERICAL if df['failed'].any() else EXIT_OK

def cmd_metrics(args, trace):
    cfg = load_scenario(os.path.join(args.run_dir, 'resolved_config.yaml'))
    _, log = libexport.read_trajectory(os.path.join(args.run_dir, 'trajectory.csv'))
    check = os.path.join(args.run_dir, 'metrics_check.csv')
    libexport.write_metrics(check, libmetrics.metrics_series(log, cfg), cfg)
    with open(os.path.join(args.run_dir, 'metrics.csv'), 'rb') as f:
        expected = f.read()
    with open(check, 'rb') as f:
        actual = f.read()
    if actual != expected:
        libtrace.warn(f'{check} differs from metrics.csv')
        return EXIT_IO
    trace.show(0, f'{check}: metrics reproduced', fg='green')
    return EXIT_OK

def build_parser():
    parser = argparse.ArgumentParser(
        description='STMR swarm simulation and analysis')
    parser.add_argument(
        '-c', '--color', action='store_true',
        help='apply ANSI color escape sequences even for non-terminal.')
    parser.add_argument(
        '-t', '--trace', type=int, default=0,
        help='show display verbosely: 1=progress and switch summary, 2=details.')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('simulate', help='run one scenario')
    p.add_argument('config', help='scenario file (YAML)')
    p.add_argument('--out', default='out', help='output directory.')
    p.add_argument('--no-dwell-enforce', action='store_true',
                   help='switch to the strongest flow source without the dwell-time check.')
    p.add_argument('--seed', type=int, help='override scenario seed.')
    p.add_argument('--duration', type=float, help='override scenario duration [s].')
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('compare', help='run several models from the same start')
    p.add_argument('config', help='scenario file (YAML)')
    p.add_argument('--models', required=True,
                   help='comma separated: stmr, stmr_mc, vicsek, cucker_smale, wfi.')
    p.add_argument('--single-agent', action='store_true',
                   help='only agent 0 is controlled, the rest hold heading.')
    p.add_argument('--out', default='out', help='output directory.')
    p.add_argument('-j', '--jobs', type=int, default=1, help='parallel runs.')
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser('stability', help='bi-agent eigenvalue table')
    p.add_argument('--ka', default='0.01:10:4', help='K_a grid lo:hi:n.')
    p.add_argument('--alpha', default='0.01:10:4', help='alpha grid lo:hi:n.')
    p.add_argument('--spacing', choices=('lin', 'log'), default='log',
                   help='grid spacing.')
    p.add_argument('-o', '--output', help='output file (default: stdout).')
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser('sweep', help='run one scenario over several seeds')
    p.add_argument('config', help='scenario file (YAML)')
    p.add_argument('--seeds', type=int, required=True, help='number of seeds K.')
    p.add_argument('--out', default='out', help='output directory.')
    p.add_argument('-j', '--jobs', type=int, default=1, help='parallel runs.')
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser('metrics', help='recompute metrics of an exported run')
    p.add_argument('run_dir', help='directory written by simulate')
    p.set_defaults(func=cmd_metrics)
    return parser

def main(argv=None):
    args  = build_parser().parse_args(argv)
    trace = libtrace.Trace(sys.stderr, args.trace, args.color)
    try:
        return args.func(args, trace)
    except ConfigError as e:
        libtrace.err(f'configuration error: {e}')
        return EXIT_CONFIG
    except NumericalError as e:
        libtrace.err(f'numerical failure: {e}')
        return EXIT_NUMERICAL
    except OSError as e:
        if isinstance(e, BrokenPipeError):
            raise
        libtrace.err(f'{e}')
        return EXIT_IO

if __name__ == '__main__':
    try:
        sys.exit(main())
    except (BrokenPipeError, IOError):
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        sys.exit(1)
    except KeyboardInterrupt:
        libtrace.warn("User break - terminated")
        sys.exit()

# EOF
