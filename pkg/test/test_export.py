# test_export.py: CSV export and the command-line front end
# A part of STMR Swarm Tool
#
# Released under BSD 2-clause license.

import os

import numpy as np
import pandas as pd
import pytest

import libexport
import libswarm
import stmrswarm
from   libexport import fmt, read_table, read_trajectory
from   libscenario import config_hash, load_scenario, with_overrides

EXPECT_DIR = os.path.join(os.path.dirname(__file__), 'expect')

def read_bytes(path):
    with open(path, 'rb') as f:
        return f.read()

def test_fmt():
    assert fmt(.1) == '0.1'
    assert fmt(np.float64(2.)) == '2.0'
    assert fmt(1e-20) == '1e-20'
    assert fmt(-.5) == '-0.5'
    assert fmt(None) == 'NA' and fmt(np.nan) == 'NA'
    assert fmt(True) == 'true' and fmt(np.bool_(False)) == 'false'
    assert fmt(np.int64(3)) == '3'
    x = 0.1 + 0.2
    assert float(fmt(x)) == x

def test_bundle_round_trip(tmp_path, sample_path):
    cfg = load_scenario(sample_path('tiny.yaml'))
    result = libswarm.run(cfg)
    libexport.write_bundle(result, str(tmp_path))
    for name in ('trajectory.csv', 'switches.csv', 'metrics.csv', 'dwell.csv',
                 'resolved_config.yaml'):
        assert (tmp_path / name).exists()
    assert not (tmp_path / 'failure.txt').exists()
    header, log = read_trajectory(str(tmp_path / 'trajectory.csv'))
    assert header == f'# stmrswarm {libexport.VERSION} config_hash={config_hash(cfg)} seed=7'
    for name in ('t', 'x', 'y', 'theta', 'theta_unwrapped', 'v', 'omega', 'target'):
        assert (getattr(log, name) == getattr(result.log, name)).all()
    assert np.array_equal(log.peak, result.log.peak, equal_nan=True)
    assert load_scenario(str(tmp_path / 'resolved_config.yaml')) == cfg
    _, df = read_table(str(tmp_path / 'metrics.csv'))
    assert len(df) == cfg.n_steps + 1
    assert (df['polarization'].to_numpy() == result.metrics.polarization).all()
    _, df = read_table(str(tmp_path / 'dwell.csv'))
    assert len(df) == (cfg.n_steps + 1) * cfg.n_agents
    assert (df['min_average_dwell_s'] == .2).all()
    _, df = read_table(str(tmp_path / 'switches.csv'))
    assert len(df) == len(result.switches)

def test_baseline_bundle_marks_absent_values(tmp_path, sample_path):
    cfg = with_overrides(load_scenario(sample_path('tiny.yaml')), **{'controller.kind': 'vicsek'})
    libexport.write_bundle(libswarm.run(cfg), str(tmp_path))
    assert not (tmp_path / 'dwell.csv').exists()
    lines = (tmp_path / 'trajectory.csv').read_text().splitlines()
    assert lines[2].endswith(',NA,NA')
    assert 'graph=radius_unit' in (tmp_path / 'metrics.csv').read_text().splitlines()[0]

def test_simulate_is_deterministic(tmp_path, sample_path):
    a, b = str(tmp_path / 'a'), str(tmp_path / 'b')
    for out in (a, b):
        assert stmrswarm.main(['simulate', sample_path('tiny.yaml'), '--out', out]) == 0
    for name in os.listdir(a):
        assert read_bytes(os.path.join(a, name)) == read_bytes(os.path.join(b, name))
    assert stmrswarm.main(['metrics', a]) == 0
    assert read_bytes(os.path.join(a, 'metrics.csv')) == \
        read_bytes(os.path.join(a, 'metrics_check.csv'))

def test_simulate_overrides(tmp_path, sample_path):
    out = str(tmp_path)
    assert stmrswarm.main(['simulate', sample_path('tiny.yaml'), '--out', out,
                           '--duration', '0', '--no-dwell-enforce', '--seed', '3']) == 0
    _, df = read_table(os.path.join(out, 'trajectory.csv'))
    assert len(df) == 6 and (df['time_s'] == 0.).all()
    resolved = load_scenario(os.path.join(out, 'resolved_config.yaml'))
    assert resolved.seed == 3 and resolved.dwell.enforce is False

def test_simulate_numerical_failure(tmp_path, sample_path, monkeypatch):
    rates = libswarm.libctrl.pursuit_rates
    monkeypatch.setattr(libswarm.libctrl, 'pursuit_rates', lambda *a: rates(*a) * np.inf)
    out = str(tmp_path)
    assert stmrswarm.main(['simulate', sample_path('tiny.yaml'), '--out', out]) == 3
    text = (tmp_path / 'failure.txt').read_text()
    assert 'non-finite' in text
    _, df = read_table(os.path.join(out, 'trajectory.csv'))
    assert len(df) == 6

def test_config_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / 'bad.yaml'
    bad.write_text('n_agents: 20\ndwell:\n  epsilon: 3.0\n')
    assert stmrswarm.main(['simulate', str(bad), '--out', str(tmp_path)]) == 2
    assert 'line 3' in capsys.readouterr().err
    assert stmrswarm.main(['simulate', str(tmp_path / 'missing.yaml')]) == 2

def test_compare(tmp_path, sample_path):
    out = str(tmp_path)
    assert stmrswarm.main(['compare', sample_path('tiny.yaml'), '--models',
                           'stmr,vicsek,cucker_smale,wfi', '--out', out]) == 0
    for name in ('stmr', 'vicsek', 'cucker_smale', 'wfi'):
        assert (tmp_path / name / 'trajectory.csv').exists()
    _, df = read_table(os.path.join(out, 'compare_metrics.csv'))
    assert list(df['model'].unique()) == ['stmr', 'vicsek', 'cucker_smale', 'wfi']
    assert len(df) == 4 * 201
    _, first = read_table(os.path.join(out, 'stmr', 'trajectory.csv'))
    _, other = read_table(os.path.join(out, 'wfi', 'trajectory.csv'))
    assert (first[first['time_s'] == 0.]['x_m'].to_numpy() ==
            other[other['time_s'] == 0.]['x_m'].to_numpy()).all()
    assert stmrswarm.main(['compare', sample_path('tiny.yaml'), '--models', '', '--out', out]) == 2
    assert stmrswarm.main(['compare', sample_path('tiny.yaml'), '--models', 'boids', '--out', out]) == 2

def test_compare_in_parallel_is_identical(tmp_path, sample_path):
    a, b = str(tmp_path / 'a'), str(tmp_path / 'b')
    args = ['compare', sample_path('tiny.yaml'), '--models', 'stmr_mc,vicsek', '--single-agent']
    assert stmrswarm.main(args + ['--out', a]) == 0
    assert stmrswarm.main(args + ['--out', b, '-j', '2']) == 0
    assert read_bytes(os.path.join(a, 'compare_metrics.csv')) == \
        read_bytes(os.path.join(b, 'compare_metrics.csv'))

def test_stability_golden(tmp_path):
    out = str(tmp_path / 'stability.csv')
    assert stmrswarm.main(['stability', '--ka', '0:2:3', '--alpha', '1:1:1',
                           '--spacing', 'lin', '-o', out]) == 0
    assert read_bytes(out) == read_bytes(os.path.join(EXPECT_DIR, 'stability.csv'))
    assert stmrswarm.main(['stability', '--ka', '0:1:2']) == 2
    assert stmrswarm.main(['stability', '--ka', '1:2']) == 2

def test_stability_default_grid(capsys):
    assert stmrswarm.main(['stability']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 + 16
    assert all(line.endswith(',true') for line in lines[2:])

def test_sweep(tmp_path, sample_path):
    out = str(tmp_path)
    assert stmrswarm.main(['sweep', sample_path('tiny.yaml'), '--seeds', '3', '--out', out]) == 0
    _, df = read_table(os.path.join(out, 'sweep.csv'))
    assert len(df) == 4 and df['seed'].tolist() == ['0', '1', '2', 'aggregate']
    assert (df['adt_violations'].iloc[:3] == 0).all()
    _, agg = read_table(os.path.join(out, 'aggregate.csv'))
    assert agg['statistic'].tolist() == ['mean', 'min', 'max']
    finals = df['final_circ_variance'].iloc[:3].astype(float)
    assert agg['final_circ_variance'].iloc[1] == finals.min()
    assert agg['final_circ_variance'].iloc[2] == finals.max()

def test_sweep_single_seed_aggregate_equals_run(tmp_path, sample_path):
    out = str(tmp_path)
    assert stmrswarm.main(['sweep', sample_path('tiny.yaml'), '--seeds', '1', '--out', out]) == 0
    _, df = read_table(os.path.join(out, 'sweep.csv'))
    for col in ('final_circ_variance', 'final_polarization', 'initial_circ_variance'):
        assert float(df[col].iloc[0]) == float(df[col].iloc[1])
    assert stmrswarm.main(['sweep', sample_path('tiny.yaml'), '--seeds', '0', '--out', out]) == 2

# EOF
