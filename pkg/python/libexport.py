#! /usr/bin/env python3
# -*- coding: utf-8 -*-
#
# libexport.py: deterministic CSV export and import of swarm runs
# A part of STMR Swarm Tool
#
# Released under BSD 2-clause license.
#
# Every table starts with one '#' comment line carrying the tool version,
# the configuration hash and the seed, followed by the column-name row.
# Floats are written in the shortest round-trip form, absent values as NA.

import math
import os
import sys

import libtrace
from   libctrl import STMR_KINDS
from   libdwell import average_dwell_time_series, min_average_dwell_time
from   libscenario import config_hash, dump_resolved
from   libswarm import TrajectoryLog

try:
    import numpy as np
    import pandas as pd
except ModuleNotFoundError:
    libtrace.err('''\
    This code needs numpy and pandas modules.
    Please install this module such as \"pip install numpy pandas\".
    ''')
    sys.exit(1)

VERSION = '0.1.0'
NA      = 'NA'

TRAJECTORY_COLUMNS = (
    'time_s', 'agent_id', 'x_m', 'y_m', 'theta_rad', 'theta_unwrapped_rad',
    'v_mps', 'omega_radps', 'target_id', 'peak_flow')
SWITCH_COLUMNS = ('time_s', 'agent_id', 'old_target', 'new_target', 'accepted')
METRICS_COLUMNS = (
    'time_s', 'polarization', 'mean_heading_rad', 'circular_variance',
    'linear_variance', 'fiedler_instant', 'fiedler_union', 'attentional_work',
    'edge_count', 'component_count')
DWELL_COLUMNS = ('time_s', 'agent_id', 'average_dwell_s', 'min_average_dwell_s')

GRAPH_RULE = {  # edge weight rule, echoed in the metrics header
    'stmr_pure_pursuit'     : 'tracking_unit',
    'stmr_motion_camouflage': 'tracking_unit',
    'vicsek'                : 'radius_unit',
    'cucker_smale'          : 'cs_psi',
    'wfi'                   : 'nearness',
}

def fmt(value):
    ''' returns shortest round-trip text of value '''
    if value is None:
        return NA
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    value = float(value)
    if math.isnan(value):
        return NA
    return repr(value)

def fmt_target(value):
    return NA if value < 0 else str(int(value))

def header_line(cfg, extra=''):
    line = f'# stmrswarm {VERSION} config_hash={config_hash(cfg)} seed={cfg.seed}'
    return line + (' ' + extra if extra else '')

def write_table(path, header, columns, rows):
    ''' writes header, column row and rows of preformatted fields '''
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(header + '\n')
        f.write(','.join(columns) + '\n')
        for row in rows:
            f.write(','.join(row) + '\n')

def trajectory_rows(log):
    for k in range(log.n_snapshots):
        t = fmt(log.t[k])
        for i in range(log.n_agents):
            yield (t, str(i), fmt(log.x[k, i]), fmt(log.y[k, i]), fmt(log.theta[k, i]),
                   fmt(log.theta_unwrapped[k, i]), fmt(log.v[k, i]),
                   fmt(log.omega[k, i]), fmt_target(log.target[k, i]), fmt(log.peak[k, i]))

def switch_rows(switches):
    for e in switches:
        yield (fmt(e.time), str(e.agent_id), fmt_target(e.old_target),
               fmt_target(e.new_target), fmt(e.accepted))

def metrics_rows(m):
    for k in range(len(m)):
        yield (fmt(m.time_s[k]), fmt(m.polarization[k]), fmt(m.mean_heading[k]),
               fmt(m.circ_variance[k]), fmt(m.linear_variance[k]),
               fmt(m.fiedler_instant[k]), fmt(m.fiedler_union[k]),
               fmt(m.attentional_work[k]), fmt(m.edge_count[k]),
               fmt(m.component_count[k]))

def dwell_rows(ledgers, t_grid, cfg):
    na = fmt(min_average_dwell_time(cfg.dwell))
    ts = [fmt(t) for t in t_grid]
    for i, ledger in enumerate(ledgers):
        if ledger is None:
            continue
        for t, a in zip(ts, average_dwell_time_series(ledger, t_grid)):
            yield (t, str(i), fmt(a), na)

def write_metrics(path, metrics, cfg):
    write_table(path, header_line(cfg, f'graph={GRAPH_RULE[cfg.controller.kind]}'),
                METRICS_COLUMNS, metrics_rows(metrics))

def write_bundle(result, out_dir):
    ''' writes all tables of a run into out_dir '''
    cfg = result.cfg
    os.makedirs(out_dir, exist_ok=True)
    head = header_line(cfg)
    write_table(os.path.join(out_dir, 'trajectory.csv'), head,
                TRAJECTORY_COLUMNS, trajectory_rows(result.log))
    write_table(os.path.join(out_dir, 'switches.csv'), head,
                SWITCH_COLUMNS, switch_rows(result.switches))
    if result.metrics is not None:
        write_metrics(os.path.join(out_dir, 'metrics.csv'), result.metrics, cfg)
    if cfg.controller.kind in STMR_KINDS:
        write_table(os.path.join(out_dir, 'dwell.csv'), head, DWELL_COLUMNS,
                    dwell_rows(result.ledgers, [float(t) for t in result.log.t], cfg))
    with open(os.path.join(out_dir, 'resolved_config.yaml'), 'w',
              encoding='utf-8', newline='\n') as f:
        f.write(head + '\n')
        f.write(dump_resolved(cfg))
    failure = os.path.join(out_dir, 'failure.txt')
    if result.failure:
        with open(failure, 'w', encoding='utf-8', newline='\n') as f:
            f.write(head + '\n')
            f.write(f'numerical failure after t={fmt(result.log.t[-1])}: {result.failure}\n')
    elif os.path.exists(failure):
        os.remove(failure)

def read_table(path):
    ''' returns (header line, DataFrame) of an exported table '''
    with open(path, encoding='utf-8') as f:
        header = f.readline().rstrip('\n')
    if not header.startswith('#'):
        raise ValueError(f'{path}: missing header comment line.')
    df = pd.read_csv(path, skiprows=1, na_values=[NA], keep_default_na=False,
                     float_precision='round_trip')
    return header, df

def read_trajectory(path):
    ''' returns (header line, TrajectoryLog) of an exported trajectory '''
    header, df = read_table(path)
    if tuple(df.columns) != TRAJECTORY_COLUMNS:
        raise ValueError(f'{path}: unexpected columns {tuple(df.columns)}')
    n = int(df['agent_id'].max()) + 1
    if len(df) % n:
        raise ValueError(f'{path}: {len(df)} rows do not form full snapshots of {n} agents.')
    s = len(df) // n
    def col(name):
        return df[name].to_numpy(dtype=float).reshape(s, n)
    target = df['target_id'].fillna(-1).to_numpy(dtype=float).astype(int).reshape(s, n)
    return header, TrajectoryLog(
        t               = col('time_s')[:, 0].copy(),
        x               = col('x_m'),
        y               = col('y_m'),
        theta           = col('theta_rad'),
        theta_unwrapped = col('theta_unwrapped_rad'),
        v               = col('v_mps'),
        omega           = col('omega_radps'),
        target          = target,
        peak            = col('peak_flow'))

# EOF
