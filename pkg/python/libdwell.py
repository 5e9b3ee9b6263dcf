#! /usr/bin/env python3
# -*- coding: utf-8 -*-
#
# libdwell.py: target switching under an average dwell time bound
# A part of STMR Swarm Tool
#
# Released under BSD 2-clause license.
#
# A switching signal has average dwell time N_a when the number of
# switches N_sigma(t, t_lo) in any window [t_lo, t) satisfies
#
#   N_sigma(t, t_lo) <= N_0 + (t - t_lo) / N_a,
#
# and boundedness holds for N_0 >= 1 and N_a >= ln(mu_k) / (lambda - eps).
# Each agent owns one ledger; a switch to a new target is granted only if
# the inequality still holds with the new switch counted.

import math
from dataclasses import dataclass, field

from libgeom import ConfigError

WINDOWS = ('run', 'all')

@dataclass(frozen=True)
class DwellTimeConfig:
    mu_k       : float = 10.   # switching overshoot constant, >= 1
    lam        : float = 1.    # subsystem decay rate [1/s]
    epsilon    : float = .3    # margin in (0, lam) [1/s]
    n0         : float = 1.    # chatter bound, >= 1
    enforce    : bool  = True
    na_override: float = None  # direct average dwell time [s]
    window     : str   = 'run' # 'run': t_lo at run start, 'all': every t_lo

    def __post_init__(self):
        if not self.mu_k >= 1.:
            raise ConfigError(f'mu_k should be 1 or more ({self.mu_k}).')
        if not self.lam > 0.:
            raise ConfigError(f'lambda should be positive ({self.lam}).')
        if not 0. < self.epsilon < self.lam:
            raise ConfigError(f'epsilon should be in (0, lambda) ({self.epsilon}).')
        if not self.n0 >= 1.:
            raise ConfigError(f'n0 should be 1 or more ({self.n0}).')
        if self.na_override is not None and not self.na_override >= 0.:
            raise ConfigError(f'na_override should be nonnegative ({self.na_override}).')
        if self.window not in WINDOWS:
            raise ConfigError(f'window should be one of {WINDOWS} ({self.window}).')

def min_average_dwell_time(cfg):
    ''' returns the lower bound ln(mu_k) / (lambda - epsilon) [s],
        or the configured override '''
    if cfg.na_override is not None:
        return cfg.na_override
    if cfg.epsilon >= cfg.lam:
        raise ConfigError(f'epsilon ({cfg.epsilon}) should be less than lambda ({cfg.lam}).')
    return math.log(cfg.mu_k) / (cfg.lam - cfg.epsilon)

def adt_bound_holds(count, span, cfg):
    ''' returns True if count switches within span seconds respect the bound '''
    na = min_average_dwell_time(cfg)
    if na == 0.:
        return True
    return count <= cfg.n0 + span / na

@dataclass
class DwellTimeLedger:
    current_target: int
    window_start  : float = 0.
    switch_times  : list  = field(default_factory=list)
    last_time     : float = None

    @property
    def switch_count(self):
        return len(self.switch_times)

def request_switch(ledger, cfg, t, proposed):
    ''' returns True and records the switch when it is granted '''
    if ledger.last_time is not None and t < ledger.last_time:
        raise ValueError(f'switch request at {t} precedes {ledger.last_time}.')
    ledger.last_time = t
    if proposed == ledger.current_target:
        return False
    if cfg.enforce:
        if not adt_bound_holds(ledger.switch_count + 1, t - ledger.window_start, cfg):
            return False
        if cfg.window == 'all':
            n = ledger.switch_count
            for k, t_lo in enumerate(ledger.switch_times):
                if not adt_bound_holds(n - k + 1, t - t_lo, cfg):
                    return False
    if ledger.switch_times and t <= ledger.switch_times[-1]:
        return False  # one switch per instant
    ledger.switch_times.append(t)
    ledger.current_target = proposed
    return True

def average_dwell_time_series(ledger, t_grid):
    ''' returns A(t) = (t - t_lo) / max(N_sigma(t), 1) on t_grid '''
    result = []
    k = 0
    prev = None
    for t in t_grid:
        if prev is not None and t < prev:
            raise ValueError('t_grid should be nondecreasing.')
        prev = t
        while k < ledger.switch_count and ledger.switch_times[k] <= t:
            k += 1
        result.append((t - ledger.window_start) / max(k, 1))
    return result

def adt_violations(switch_times, cfg, window='all', window_start=0.):
    ''' returns number of (start, end) event pairs breaking the bound

        window='run' checks the windows [window_start, t_j] only,
        window='all' additionally every window starting at a switch.
    '''
    violations = 0
    for j, t_j in enumerate(switch_times):
        if not adt_bound_holds(j + 1, t_j - window_start, cfg):
            violations += 1
        if window == 'all':
            for i in range(j):
                if not adt_bound_holds(j - i + 1, t_j - switch_times[i], cfg):
                    violations += 1
    return violations

# EOF
