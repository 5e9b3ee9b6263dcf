#! /usr/bin/env python3
# -*- coding: utf-8 -*-
#
# libgeom.py: planar agent state, angle arithmetic and bi-agent geometry
# A part of STMR Swarm Tool
#
# Released under BSD 2-clause license.
#
# Angles are kept wrapped to the half-open interval (-pi, pi]. Every
# angle difference goes through wrap_angle() so that headings do not
# drift by multiples of 2 pi over long runs.

import math
from dataclasses import dataclass, field

try:
    import numpy as np
except ModuleNotFoundError:
    import libtrace
    libtrace.err('''\
    This code needs numpy module.
    Please install this module such as \"pip install numpy\".
    ''')
    raise SystemExit(1)

PI    = math.pi
TWOPI = 2. * math.pi

class ConfigError(Exception):
    ''' invalid scenario or parameter, optionally with its source line '''
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)

class NumericalError(Exception):
    ''' non-finite state detected during a run '''
    def __init__(self, message, step=None, agent=None):
        self.step    = step
        self.agent   = agent
        self.partial = None  # partial run result, attached by the engine
        super().__init__(message)

def wrap_angle(a):
    ''' returns a wrapped to (-pi, pi] '''
    if not math.isfinite(a):
        raise ValueError(f'non-finite angle: {a}')
    r = math.fmod(a, TWOPI)
    if r <= -PI:
        r += TWOPI
    elif r > PI:
        r -= TWOPI
    return r

def wrap_array(a):
    ''' vectorized wrap_angle for numpy arrays '''
    r = np.fmod(a, TWOPI)
    r = np.where(r <= -PI, r + TWOPI, r)
    return np.where(r > PI, r - TWOPI, r)

def unwrap_step(prev_unwrapped, prev_wrapped, new_wrapped):
    ''' returns cumulative heading after a wrapped heading update '''
    return prev_unwrapped + wrap_angle(new_wrapped - prev_wrapped)

@dataclass(frozen=True)
class AgentState:
    x    : float        # position [m]
    y    : float        # position [m]
    theta: float        # heading [rad], wrapped
    v    : float        # forward speed [m/s]
    omega: float = 0.   # last commanded turn rate [rad/s]

    def __post_init__(self):
        for name in ('x', 'y', 'v', 'omega'):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f'non-finite {name}: {getattr(self, name)}')
        object.__setattr__(self, 'theta', wrap_angle(self.theta))
        if self.v <= 0.:
            raise ValueError(f'forward speed should be positive ({self.v}).')

    @property
    def xdot(self):
        return self.v * math.cos(self.theta)

    @property
    def ydot(self):
        return self.v * math.sin(self.theta)

@dataclass
class SwarmState:
    ''' swarm snapshot held as per-agent arrays; agent order never changes

        target and peak hold the sensing result of the step that produced
        this snapshot (-1 and nan when the model does not sense).
    '''
    t    : float
    x    : np.ndarray
    y    : np.ndarray
    theta: np.ndarray
    v    : np.ndarray
    omega: np.ndarray
    target: np.ndarray = field(default=None)
    peak  : np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.x)
        if n < 2:
            raise ConfigError(f'a swarm needs at least two agents ({n}).')
        if self.t < 0.:
            raise ValueError(f'negative simulation time: {self.t}')
        if self.target is None:
            self.target = np.full(n, -1, dtype=int)
        if self.peak is None:
            self.peak = np.full(n, np.nan)

    @property
    def n(self):
        return len(self.x)

    @property
    def agents(self):
        return [AgentState(float(self.x[i]), float(self.y[i]), float(self.theta[i]),
                           float(self.v[i]), float(self.omega[i])) for i in range(self.n)]

    def agent(self, i):
        return AgentState(float(self.x[i]), float(self.y[i]), float(self.theta[i]),
                          float(self.v[i]), float(self.omega[i]))

    @classmethod
    def from_agents(cls, agents, t=0.):
        return cls(
            t     = t,
            x     = np.array([a.x     for a in agents], dtype=float),
            y     = np.array([a.y     for a in agents], dtype=float),
            theta = np.array([a.theta for a in agents], dtype=float),
            v     = np.array([a.v     for a in agents], dtype=float),
            omega = np.array([a.omega for a in agents], dtype=float))

@dataclass(frozen=True)
class RelativeGeometry:
    r      : float  # separation [m]
    theta_t: float  # line-of-sight angle from viewer to target [rad]
    gamma_a: float  # viewer bearing to target [rad]
    gamma_b: float  # target bearing back [rad]

def relative_geometry(viewer, target):
    ''' returns separation, line-of-sight angle and both azimuths '''
    dx = target.x - viewer.x
    dy = target.y - viewer.y
    theta_t = wrap_angle(math.atan2(dy, dx))
    return RelativeGeometry(
        r       = math.hypot(dx, dy),
        theta_t = theta_t,
        gamma_a = wrap_angle(theta_t - viewer.theta),
        gamma_b = wrap_angle(PI + target.theta - theta_t))

# EOF
