#! /usr/bin/env python3
# -*- coding: utf-8 -*-
#
# libscenario.py: scenario description, YAML loading and initial conditions
# A part of STMR Swarm Tool
#
# Released under BSD 2-clause license.
#
# A scenario file maps one to one onto ScenarioConfig:
#
#   name: paper20
#   n_agents: 20
#   v: 0.1
#   dt: 0.01
#   duration: 50.0
#   seed: 0
#   controller: {kind: stmr_pure_pursuit, gain_K: 0.1}
#   dwell: {mu_k: 10, lambda: 1.0, epsilon: 0.3, n0: 1, enforce: true}
#   init: {kind: random, box: [0.0, 1.0, 0.0, 1.0]}
#
# Unknown keys and invalid values raise ConfigError with the source line.

import dataclasses
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field

import libtrace
from   libctrl import ControllerConfig
from   libdwell import DwellTimeConfig
from   libflow import R_MIN
from   libgeom import ConfigError, PI, SwarmState, wrap_angle

try:
    import numpy as np
    import yaml
except ModuleNotFoundError:
    libtrace.err('''\
    This code needs numpy and PyYAML modules.
    Please install this module such as \"pip install numpy pyyaml\".
    ''')
    sys.exit(1)

INIT_KINDS = ('random', 'explicit', 'formation')

@dataclass(frozen=True)
class InitConfig:
    kind   : str   = 'random'
    box    : tuple = (0., 5., 0., 5.)  # xmin, xmax, ymin, ymax [m]
    poses  : tuple = ()                # ((x, y, theta), ...) for explicit
    spacing: float = 1.                # formation lattice spacing [m]
    columns: int   = 5                 # formation lattice columns
    heading: float = 0.                # formation common heading [rad]
    offset : float = .5                # heading offset of agent 0 [rad]

    def __post_init__(self):
        if self.kind not in INIT_KINDS:
            raise ConfigError(f'unknown init kind: {self.kind}')
        if len(self.box) != 4 or not (self.box[0] < self.box[1] and self.box[2] < self.box[3]):
            raise ConfigError(f'box should be [xmin, xmax, ymin, ymax] with min < max ({self.box}).')
        for pose in self.poses:
            if len(pose) != 3:
                raise ConfigError(f'pose should be [x, y, theta] ({pose}).')
        if not self.spacing > 0.:
            raise ConfigError(f'spacing should be positive ({self.spacing}).')
        if self.columns < 1:
            raise ConfigError(f'columns should be positive ({self.columns}).')

@dataclass(frozen=True)
class ScenarioConfig:
    n_agents    : int              = 20
    controller  : ControllerConfig = field(default_factory=ControllerConfig)
    dwell       : DwellTimeConfig  = field(default_factory=DwellTimeConfig)
    v           : float            = .1    # forward speed [m/s]
    dt          : float            = .01   # integration step [s]
    duration    : float            = 50.   # horizon [s]
    seed        : int              = 0
    init        : InitConfig       = field(default_factory=InitConfig)
    r_min       : float            = R_MIN # nearness clamp [m]
    single_agent: bool             = False # only agent 0 runs its model
    name        : str              = 'scenario'

    def __post_init__(self):
        if self.n_agents < 2:
            raise ConfigError(f'n_agents should be 2 or more ({self.n_agents}).')
        if not self.dt > 0.:
            raise ConfigError(f'dt should be positive ({self.dt}).')
        if not (self.duration >= self.dt or self.duration == 0.):
            raise ConfigError(f'duration should be 0 or at least dt ({self.duration}).')
        if not self.v > 0.:
            raise ConfigError(f'v should be positive ({self.v}).')
        if not self.r_min > 0.:
            raise ConfigError(f'r_min should be positive ({self.r_min}).')
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f'seed should be a 64-bit unsigned integer ({self.seed}).')
        if self.init.kind == 'explicit' and len(self.init.poses) != self.n_agents:
            raise ConfigError(
                f'explicit init needs {self.n_agents} poses ({len(self.init.poses)}).')

    @property
    def n_steps(self):
        # guard against 50 / 0.01 = 4999.999...
        return int(math.floor(self.duration / self.dt + 1e-9))

# YAML key -> (dataclass field, type)
SCHEMA = {
    None: (ScenarioConfig, {
        'name': ('name', str), 'n_agents': ('n_agents', int), 'v': ('v', float),
        'dt': ('dt', float), 'duration': ('duration', float), 'seed': ('seed', int),
        'r_min': ('r_min', float), 'single_agent': ('single_agent', bool),
        'controller': ('controller', 'controller'), 'dwell': ('dwell', 'dwell'),
        'init': ('init', 'init')}),
    'controller': (ControllerConfig, {
        'kind': ('kind', str), 'gain_K': ('gain_K', float),
        'vicsek_radius': ('vicsek_radius', float),
        'vicsek_noise_eta': ('vicsek_noise_eta', float),
        'cs_strength': ('cs_strength', float), 'cs_beta': ('cs_beta', float),
        'cs_speed_spread': ('cs_speed_spread', float),
        'omega_max': ('omega_max', float), 'wfi_samples': ('wfi_samples', int)}),
    'dwell': (DwellTimeConfig, {
        'mu_k': ('mu_k', float), 'lambda': ('lam', float), 'epsilon': ('epsilon', float),
        'n0': ('n0', float), 'enforce': ('enforce', bool),
        'na_override': ('na_override', float), 'window': ('window', str)}),
    'init': (InitConfig, {
        'kind': ('kind', str), 'box': ('box', 'floats'), 'poses': ('poses', 'poses'),
        'spacing': ('spacing', float), 'columns': ('columns', int),
        'heading': ('heading', float), 'offset': ('offset', float)}),
}

def _line(node):
    return node.start_mark.line + 1

def _scalar(loader, node, typ, key):
    if not isinstance(node, yaml.ScalarNode):
        raise ConfigError(f'{key} should be a scalar value.', _line(node))
    value = loader.construct_object(node)
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f'{key} should be true or false ({value}).', _line(node))
        return value
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f'{key} should be an integer ({value}).', _line(node))
        return value
    if typ is float:
        if value is None and key == 'na_override':
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f'{key} should be a number ({value}).', _line(node))
        if not math.isfinite(value):
            raise ConfigError(f'{key} should be finite ({value}).', _line(node))
        return float(value)
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(f'{key} should be a string ({value}).', _line(node))
        return value
    raise ConfigError(f'unsupported type of {key}', _line(node))

def _floats(loader, node, key):
    if not isinstance(node, yaml.SequenceNode):
        raise ConfigError(f'{key} should be a list of numbers.', _line(node))
    return tuple(_scalar(loader, item, float, key) for item in node.value)

def _section(loader, node, section):
    cls, keys = SCHEMA[section]
    name = section or 'scenario'
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f'{name} should be a mapping.', _line(node))
    kwargs = {}
    for knode, vnode in node.value:
        key = loader.construct_object(knode)
        if key not in keys:
            raise ConfigError(f'unknown key in {name}: {key}', _line(knode))
        attr, typ = keys[key]
        if attr in kwargs:
            raise ConfigError(f'duplicate key in {name}: {key}', _line(knode))
        if typ in ('controller', 'dwell', 'init'):
            kwargs[attr] = _section(loader, vnode, typ)
        elif typ == 'floats':
            kwargs[attr] = _floats(loader, vnode, key)
        elif typ == 'poses':
            if not isinstance(vnode, yaml.SequenceNode):
                raise ConfigError('poses should be a list of [x, y, theta].', _line(vnode))
            kwargs[attr] = tuple(_floats(loader, p, key) for p in vnode.value)
        else:
            kwargs[attr] = _scalar(loader, vnode, typ, key)
    try:
        return cls(**kwargs)
    except ConfigError as e:
        if e.line is None:
            raise ConfigError(str(e), _line(node)) from None
        raise

def parse_scenario(text):
    ''' returns ScenarioConfig from YAML text '''
    loader = yaml.SafeLoader(text)
    try:
        node = loader.get_single_node()
        if node is None:
            raise ConfigError('empty scenario.', 1)
        return _section(loader, node, None)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise ConfigError(f'YAML syntax: {e}', mark.line + 1 if mark else None) from None
    finally:
        loader.dispose()

def scenario_from_dict(d):
    ''' returns ScenarioConfig from a nested dict using scenario file keys '''
    return parse_scenario(yaml.safe_dump(d, sort_keys=False))

def load_scenario(path):
    try:
        with open(path, encoding='utf-8') as f:
            return parse_scenario(f.read())
    except OSError as e:
        raise ConfigError(f'cannot read scenario {path}: {e.strerror}') from None

def resolved_dict(cfg):
    ''' returns plain nested dict of cfg using scenario file key names '''
    def section(obj, name):
        keys = SCHEMA[name][1]
        out  = {}
        for key, (attr, typ) in keys.items():
            value = getattr(obj, attr)
            if typ in ('controller', 'dwell', 'init'):
                value = section(value, typ)
            elif typ == 'floats':
                value = [float(a) for a in value]
            elif typ == 'poses':
                value = [[float(a) for a in p] for p in value]
            out[key] = value
        return out
    return section(cfg, None)

def dump_resolved(cfg):
    return yaml.safe_dump(resolved_dict(cfg), sort_keys=True, default_flow_style=None)

def config_hash(cfg):
    canon = json.dumps(resolved_dict(cfg), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canon.encode('utf-8')).hexdigest()[:16]

def with_overrides(cfg, **changes):
    ''' returns copy of cfg; dotted keys such as dwell.enforce reach sections '''
    top = {}
    sub = {}
    for key, value in changes.items():
        if '.' in key:
            section, attr = key.split('.', 1)
            sub.setdefault(section, {})[attr] = value
        else:
            top[key] = value
    for section, attrs in sub.items():
        top[section] = dataclasses.replace(getattr(cfg, section), **attrs)
    return dataclasses.replace(cfg, **top)

def random_streams(cfg):
    ''' returns (init stream, speed stream, per-agent noise streams) '''
    ss = np.random.SeedSequence(cfg.seed)
    init_ss, speed_ss, agents_ss = ss.spawn(3)
    return (np.random.default_rng(init_ss), np.random.default_rng(speed_ss),
            [np.random.default_rng(s) for s in agents_ss.spawn(cfg.n_agents)])

def initial_state(cfg, init_rng=None, speed_rng=None):
    ''' returns the swarm at t = 0 '''
    if init_rng is None or speed_rng is None:
        init_rng, speed_rng, _ = random_streams(cfg)
    n    = cfg.n_agents
    init = cfg.init
    if init.kind == 'explicit':
        pose = np.array(init.poses, dtype=float)
        x, y, theta = pose[:, 0], pose[:, 1], pose[:, 2]
    elif init.kind == 'random':
        xmin, xmax, ymin, ymax = init.box
        x = init_rng.uniform(xmin, xmax, n)
        y = init_rng.uniform(ymin, ymax, n)
        theta = -init_rng.uniform(-PI, PI, n)  # (-pi, pi]
    else:  # formation
        k = np.arange(n)
        x = init.box[0] + init.spacing * (k % init.columns)
        y = init.box[2] + init.spacing * (k // init.columns)
        theta = np.full(n, init.heading)
        theta[0] += init.offset
    theta = np.array([wrap_angle(float(a)) for a in theta])
    v = np.full(n, cfg.v)
    spread = speed_rng.uniform(-1., 1., n)  # drawn for every model
    if cfg.controller.kind == 'cucker_smale':
        v = cfg.v * (1. + cfg.controller.cs_speed_spread * spread)
    return SwarmState(0., np.array(x, dtype=float), np.array(y, dtype=float),
                      theta, v, np.zeros(n))

# EOF
