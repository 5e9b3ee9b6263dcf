#! /usr/bin/env python3
# -*- coding: utf-8 -*-
#
# libswarm.py: fixed-step swarm simulation engine
# A part of STMR Swarm Tool
#
# Released under BSD 2-clause license.
#
# One step reads the committed state of every agent, lets each agent sense,
# switch and steer, and then commits all turn rates together before the
# explicit Euler update of the unicycle kinematics
#
#   x += v cos(theta) dt,  y += v sin(theta) dt,  theta = wrap(theta + u dt).
#
# No agent sees another agent's same-step update, so the order in which
# agents are visited does not change the result.

import sys
from dataclasses import dataclass, field

import libctrl
import libflow
import libmetrics
import libtrace
from   libctrl import STMR_KINDS
from   libdwell import DwellTimeLedger, request_switch
from   libgeom import NumericalError, SwarmState, wrap_array
from   libscenario import initial_state, random_streams

try:
    import numpy as np
except ModuleNotFoundError:
    libtrace.err('''\
    This code needs numpy module.
    Please install this module such as \"pip install numpy\".
    ''')
    sys.exit(1)

@dataclass
class TrajectoryLog:
    ''' snapshots of all agents, arrays of shape (snapshots, agents) '''
    t              : np.ndarray
    x              : np.ndarray
    y              : np.ndarray
    theta          : np.ndarray
    theta_unwrapped: np.ndarray
    v              : np.ndarray
    omega          : np.ndarray
    target         : np.ndarray  # tracked neighbor, -1 when not sensing
    peak           : np.ndarray  # sensed peak |qdot|, nan when not sensing

    @classmethod
    def allocate(cls, n_snap, n):
        return cls(np.zeros(n_snap), *[np.zeros((n_snap, n)) for _ in range(6)],
                   np.full((n_snap, n), -1, dtype=int), np.full((n_snap, n), np.nan))

    def record(self, k, state, unwrapped):
        self.t[k]               = state.t
        self.x[k]               = state.x
        self.y[k]               = state.y
        self.theta[k]           = state.theta
        self.theta_unwrapped[k] = unwrapped
        self.v[k]               = state.v
        self.omega[k]           = state.omega
        self.target[k]          = state.target
        self.peak[k]            = state.peak

    def truncate(self, n_snap):
        return TrajectoryLog(*[getattr(self, f)[:n_snap] for f in (
            't', 'x', 'y', 'theta', 'theta_unwrapped', 'v', 'omega', 'target', 'peak')])

    @property
    def n_snapshots(self):
        return len(self.t)

    @property
    def n_agents(self):
        return self.x.shape[1]

@dataclass
class SwitchEvent:
    time      : float
    agent_id  : int
    old_target: int
    new_target: int
    accepted  : bool

@dataclass
class RunResult:
    cfg     : object
    log     : TrajectoryLog
    switches: list = field(default_factory=list)
    ledgers : list = field(default_factory=list)
    metrics : object = None
    failure : str = None

    @property
    def accepted_switches(self):
        return sum(1 for e in self.switches if e.accepted)

def active_mask(cfg, n):
    active = np.ones(n, dtype=bool)
    if cfg.single_agent:
        active[1:] = False
    return active

def initial_ledgers(state, cfg):
    ''' returns one ledger per agent holding its initial STMD target '''
    if cfg.controller.kind not in STMR_KINDS:
        return [None] * state.n
    gamma, qdot, _, _ = libflow.flow_matrix(
        state.x, state.y, state.theta, state.v, state.omega, cfg.r_min)
    sensed, peak, _ = libflow.stmd_from_matrix(qdot, gamma)
    active = active_mask(cfg, state.n)
    state.target = np.where(active, sensed, -1)
    state.peak   = np.where(active, peak, np.nan)
    return [DwellTimeLedger(int(sensed[i]), window_start=state.t) if active[i] else None
            for i in range(state.n)]

def step(state, cfg, ledgers, rngs, order=None, events=None, t_next=None):
    ''' returns the swarm state one step dt later '''
    ctrl   = cfg.controller
    dt     = cfg.dt
    n      = state.n
    order  = range(n) if order is None else order
    active = active_mask(cfg, n)
    x, y, th, v = state.x, state.y, state.theta, state.v
    target = np.full(n, -1, dtype=int)
    peak   = np.full(n, np.nan)
    new_v  = v.copy()
    if ctrl.kind in STMR_KINDS:
        gamma, qdot, _, _ = libflow.flow_matrix(x, y, th, v, state.omega, cfg.r_min)
        sensed, mag, _ = libflow.stmd_from_matrix(qdot, gamma)
        for i in order:
            if not active[i]:
                continue
            ledger = ledgers[i]
            old    = ledger.current_target
            if sensed[i] != old:
                ok = request_switch(ledger, cfg.dwell, state.t, int(sensed[i]))
                if events is not None:
                    events.append(SwitchEvent(state.t, i, old, int(sensed[i]), ok))
            target[i] = ledger.current_target
            peak[i]   = mag[i]
        rows  = np.flatnonzero(active)
        cols  = target[rows]
        omega = np.zeros(n)
        if ctrl.kind == 'stmr_pure_pursuit':
            omega[rows] = libctrl.pursuit_rates(gamma[rows, cols], ctrl.gain_K, ctrl.omega_max)
        else:
            omega[rows] = libctrl.camouflage_rates(
                x, y, th, v, rows, cols, ctrl.gain_K, cfg.r_min, ctrl.omega_max)
        new_th = wrap_array(th + omega * dt)
    elif ctrl.kind == 'wfi':
        gamma, qdot, _, _ = libflow.flow_matrix(x, y, th, v, state.omega, cfg.r_min)
        rates  = libctrl.wfi_rates(gamma, qdot, ctrl.gain_K, ctrl.wfi_samples, ctrl.omega_max)
        omega  = np.where(active, rates, 0.)
        new_th = wrap_array(th + omega * dt)
    elif ctrl.kind == 'vicsek':
        eta = ctrl.vicsek_noise_eta
        xi  = np.array([rngs[i].uniform(-eta / 2., eta / 2.) for i in range(n)])
        heading = wrap_array(libctrl.vicsek_headings(x, y, th, ctrl.vicsek_radius, xi))
        new_th  = np.where(active, heading, th)
        omega   = wrap_array(new_th - th) / dt
    else:  # cucker_smale
        vx, vy = v * np.cos(th), v * np.sin(th)
        ax, ay = libctrl.cucker_smale_accels(x, y, vx, vy, ctrl.cs_strength, ctrl.cs_beta)
        nvx    = vx + np.where(active, ax, 0.) * dt
        nvy    = vy + np.where(active, ay, 0.) * dt
        new_th = np.where(active, wrap_array(np.arctan2(nvy, nvx)), th)
        new_v  = np.where(active, np.hypot(nvx, nvy), v)
        omega  = wrap_array(new_th - th) / dt
    new_x = x + v * np.cos(th) * dt
    new_y = y + v * np.sin(th) * dt
    t = state.t + dt if t_next is None else t_next
    for name, arr in (('x', new_x), ('y', new_y), ('theta', new_th),
                      ('v', new_v), ('omega', omega)):
        bad = np.flatnonzero(~np.isfinite(arr))
        if len(bad):
            raise NumericalError(
                f'non-finite {name} of agent {bad[0]} at t={t}', agent=int(bad[0]))
    return SwarmState(t, new_x, new_y, new_th, new_v, omega, target, peak)

def run(cfg, metrics=True, trace=None, order=None):
    ''' runs the scenario and returns RunResult; NumericalError carries the
        partial result in its partial attribute '''
    init_rng, speed_rng, rngs = random_streams(cfg)
    state   = initial_state(cfg, init_rng, speed_rng)
    ledgers = initial_ledgers(state, cfg)
    n_steps = cfg.n_steps
    log     = TrajectoryLog.allocate(n_steps + 1, state.n)
    unwrapped = state.theta.copy()
    log.record(0, state, unwrapped)
    result  = RunResult(cfg, log, [], ledgers)
    tick    = max(n_steps // 10, 1)
    for k in range(n_steps):
        seen = len(result.switches)
        try:
            nxt = step(state, cfg, ledgers, rngs, order, result.switches, (k + 1) * cfg.dt)
        except NumericalError as e:
            e.step = k
            result.log     = log.truncate(k + 1)
            result.failure = str(e)
            e.partial      = result
            raise
        unwrapped = unwrapped + wrap_array(nxt.theta - state.theta)
        state = nxt
        log.record(k + 1, state, unwrapped)
        if trace:
            for e in result.switches[seen:]:
                trace.show(2, f't={e.time:.2f} agent {e.agent_id}: {e.old_target} -> {e.new_target} '
                              + ('accepted' if e.accepted else 'rejected'),
                           fg='' if e.accepted else 'yellow')
        if trace and (k + 1) % tick == 0:
            trace.show(1, f'{cfg.name}: t={state.t:.2f} s ({(k + 1) * 100 // n_steps}%)', dec='dark')
    if trace:
        trace.show(1, f'{cfg.name}: {result.accepted_switches} switches accepted, '
                      f'{len(result.switches) - result.accepted_switches} rejected')
    if metrics:
        result.metrics = libmetrics.metrics_series(log, cfg)
    return result

# EOF
