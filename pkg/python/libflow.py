#! /usr/bin/env python3
# -*- coding: utf-8 -*-
#
# libflow.py: idealized planar optic flow and the STMD peak sensor
# A part of STMR Swarm Tool
#
# Released under BSD 2-clause license.
#
# The optic flow seen by a viewer a at azimuth gamma due to a neighbor b is
#
#   qdot = -thetadot_a - mu thetadot_b
#          + mu {(xdot_b - xdot_a) sin(gamma) - (ydot_b - ydot_a) cos(gamma)}
#
# with nearness mu = 1 / max(r, r_min). The STMD sensor evaluates this at
# every neighbor's own bearing and reports the neighbor with the largest
# |qdot| (lowest index wins ties).

import math
import sys
from dataclasses import dataclass

import libgeom
import libtrace
from   libgeom import ConfigError, relative_geometry, wrap_array

try:
    import numpy as np
except ModuleNotFoundError:
    libtrace.err('''\
    This code needs numpy module.
    Please install this module such as \"pip install numpy\".
    ''')
    sys.exit(1)

R_MIN = 0.05  # default nearness clamp, one robot body radius [m]

# when True, every flow_matrix() call is compared with the scalar loop
SELF_CHECK     = False
SELF_CHECK_TOL = 1e-9

@dataclass(frozen=True)
class FlowSample:
    neighbor_id: int
    gamma      : float  # azimuth of the sample [rad]
    qdot       : float  # signed optic flow [rad/s]

    @property
    def magnitude(self):
        return abs(self.qdot)

@dataclass(frozen=True)
class StmdOutput:
    peak_magnitude: float  # largest |qdot| [rad/s]
    peak_azimuth  : float  # bearing of the peak [rad]
    target_id     : int    # neighbor producing the peak

def nearness(r, r_min=R_MIN):
    return 1. / max(r, r_min)

def pairwise_flow(viewer, target, gamma, r_min=R_MIN):
    ''' returns optic flow at azimuth gamma on the viewer's retina '''
    mu  = nearness(relative_geometry(viewer, target).r, r_min)
    dvx = target.xdot - viewer.xdot
    dvy = target.ydot - viewer.ydot
    return -viewer.omega - mu * target.omega + \
        mu * (dvx * math.sin(gamma) - dvy * math.cos(gamma))

def flow_samples(swarm, viewer_id, r_min=R_MIN):
    ''' returns one flow sample per neighbor, taken at its bearing '''
    viewer  = swarm.agent(viewer_id)
    samples = []
    for j in range(swarm.n):
        if j == viewer_id:
            continue
        target = swarm.agent(j)
        gamma  = relative_geometry(viewer, target).gamma_a
        samples.append(FlowSample(j, gamma, pairwise_flow(viewer, target, gamma, r_min)))
    return samples

def stmd_sense(swarm, viewer_id, r_min=R_MIN):
    ''' returns peak optic flow magnitude, its azimuth and its producer '''
    if swarm.n < 2:
        raise ConfigError(f'STMD sensing needs at least two agents ({swarm.n}).')
    best = None
    for sample in flow_samples(swarm, viewer_id, r_min):
        if best is None or sample.magnitude > best.magnitude:
            best = sample
    return StmdOutput(best.magnitude, best.gamma, best.neighbor_id)

def flow_matrix(x, y, theta, v, omega, r_min=R_MIN):
    ''' returns N x N arrays (gamma, qdot, theta_t, mu), row i = viewer i

        gamma[i, j] is the bearing of j seen by i and qdot[i, j] the flow
        of j at that bearing; the diagonal carries zeros.
    '''
    dx      = x[None, :] - x[:, None]
    dy      = y[None, :] - y[:, None]
    r       = np.hypot(dx, dy)
    theta_t = wrap_array(np.arctan2(dy, dx))
    gamma   = wrap_array(theta_t - theta[:, None])
    mu      = 1. / np.maximum(r, r_min)
    xdot    = v * np.cos(theta)
    ydot    = v * np.sin(theta)
    dvx     = xdot[None, :] - xdot[:, None]
    dvy     = ydot[None, :] - ydot[:, None]
    qdot    = -omega[:, None] - mu * omega[None, :] + \
        mu * (dvx * np.sin(gamma) - dvy * np.cos(gamma))
    np.fill_diagonal(gamma, 0.)
    np.fill_diagonal(qdot, 0.)
    if SELF_CHECK:
        _check_flow_matrix(x, y, theta, v, omega, r_min, gamma, qdot)
    return gamma, qdot, theta_t, mu

def stmd_from_matrix(qdot, gamma):
    ''' returns (target, peak_magnitude, peak_azimuth) arrays for all viewers '''
    mag = np.abs(qdot)
    np.fill_diagonal(mag, -np.inf)
    target = np.argmax(mag, axis=1)  # first maximum, i.e. lowest index
    rows   = np.arange(len(target))
    return target, mag[rows, target], gamma[rows, target]

def _check_flow_matrix(x, y, theta, v, omega, r_min, gamma, qdot):
    swarm = libgeom.SwarmState(0., x, y, theta, v, omega)
    for i in range(swarm.n):
        for s in flow_samples(swarm, i, r_min):
            scale = max(1., abs(s.qdot))
            if abs(qdot[i, s.neighbor_id] - s.qdot) > SELF_CHECK_TOL * scale or \
               abs(libgeom.wrap_angle(gamma[i, s.neighbor_id] - s.gamma)) > SELF_CHECK_TOL:
                raise AssertionError(
                    f'flow matrix mismatch at ({i}, {s.neighbor_id}): '
                    f'{qdot[i, s.neighbor_id]} != {s.qdot}')

# EOF
