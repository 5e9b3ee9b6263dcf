#! /usr/bin/env python3
# -*- coding: utf-8 -*-
#
# libctrl.py: steering laws of the STMR swarm and of the baseline models
# A part of STMR Swarm Tool
#
# Released under BSD 2-clause license.
#
# STMR agents steer from the STMD output: pure pursuit turns in proportion
# to the bearing of the tracked neighbor, motion camouflage drives the
# line-of-sight rotation rate to zero. The baselines are the Vicsek
# heading rule, the Cucker-Smale velocity consensus and a first-harmonic
# wide-field integration (WFI) of the optic flow ring.

import math
import sys
from dataclasses import dataclass

import libtrace
from   libflow import R_MIN, nearness, pairwise_flow
from   libgeom import ConfigError, PI, relative_geometry, wrap_angle

try:
    import numpy as np
except ModuleNotFoundError:
    libtrace.err('''\
    This code needs numpy module.
    Please install this module such as \"pip install numpy\".
    ''')
    sys.exit(1)

KINDS = (
    'stmr_pure_pursuit', 'stmr_motion_camouflage', 'vicsek', 'cucker_smale', 'wfi')
STMR_KINDS = ('stmr_pure_pursuit', 'stmr_motion_camouflage')
OMEGA_MAX  = 2.84  # robot actuation limit [rad/s]

@dataclass(frozen=True)
class ControllerConfig:
    kind            : str   = 'stmr_pure_pursuit'
    gain_K          : float = 0.1        # feedback gain
    vicsek_radius   : float = 2.0        # interaction radius [m]
    vicsek_noise_eta: float = 0.1        # noise width [rad]
    cs_strength     : float = 1.0        # coupling strength [1/s]
    cs_beta         : float = 0.5        # communication weight exponent
    cs_speed_spread : float = 0.         # relative spread of initial C-S speeds
    omega_max       : float = OMEGA_MAX  # turn rate saturation [rad/s]
    wfi_samples     : int   = 72         # azimuth bins of the WFI ring

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f'unknown controller kind: {self.kind}')
        if not self.gain_K > 0.:
            raise ConfigError(f'gain_K should be positive ({self.gain_K}).')
        if not self.vicsek_radius > 0.:
            raise ConfigError(f'vicsek_radius should be positive ({self.vicsek_radius}).')
        if not self.vicsek_noise_eta >= 0.:
            raise ConfigError(f'vicsek_noise_eta should be nonnegative ({self.vicsek_noise_eta}).')
        if not self.omega_max > 0.:
            raise ConfigError(f'omega_max should be positive ({self.omega_max}).')
        if not 0. <= self.cs_speed_spread < 1.:
            raise ConfigError(f'cs_speed_spread should be in [0, 1) ({self.cs_speed_spread}).')
        if self.wfi_samples < 8:
            raise ConfigError(f'wfi_samples should be 8 or more ({self.wfi_samples}).')

def saturate(omega, omega_max=OMEGA_MAX):
    return min(max(omega, -omega_max), omega_max)

def pure_pursuit(sense, K, omega_max=OMEGA_MAX):
    ''' returns turn rate steering toward the peak azimuth '''
    return saturate(K * sense.peak_azimuth, omega_max)

def los_rate(viewer, target, r_min=R_MIN):
    ''' returns rotation rate of the viewer-to-target line of sight [rad/s] '''
    g   = relative_geometry(viewer, target)
    dvx = target.xdot - viewer.xdot
    dvy = target.ydot - viewer.ydot
    return nearness(g.r, r_min) * \
        (dvy * math.cos(g.theta_t) - dvx * math.sin(g.theta_t))

def motion_camouflage(viewer, target, K, r_min=R_MIN, omega_max=OMEGA_MAX):
    ''' returns turn rate nulling the line-of-sight rotation '''
    return saturate(-K * los_rate(viewer, target, r_min), omega_max)

def vicsek_heading(swarm, i, radius, eta, rng):
    ''' returns new heading of agent i: neighborhood circular mean plus noise

        The neighborhood includes agent i itself; one uniform draw on
        [-eta/2, eta/2] is taken from rng on every call.
    '''
    if not radius > 0.:
        raise ValueError(f'radius should be positive ({radius}).')
    xi = rng.uniform(-eta / 2., eta / 2.)
    ss = cs = 0.
    for j in range(swarm.n):
        if math.hypot(swarm.x[j] - swarm.x[i], swarm.y[j] - swarm.y[i]) <= radius:
            ss += math.sin(swarm.theta[j])
            cs += math.cos(swarm.theta[j])
    return wrap_angle(math.atan2(ss, cs) + xi)

def cs_weight(r, beta):
    ''' Cucker-Smale communication weight 1 / (1 + r^2)^beta '''
    return (1. + r * r) ** -beta

def cucker_smale_accel(swarm, i, strength, beta):
    ''' returns velocity-consensus acceleration (ax, ay) of agent i '''
    if swarm.n < 2:
        raise ConfigError(f'Cucker-Smale needs at least two agents ({swarm.n}).')
    me = swarm.agent(i)
    ax = ay = 0.
    for j in range(swarm.n):
        if j == i:
            continue
        other = swarm.agent(j)
        psi = cs_weight(math.hypot(other.x - me.x, other.y - me.y), beta)
        ax += psi * (other.xdot - me.xdot)
        ay += psi * (other.ydot - me.ydot)
    return strength / swarm.n * ax, strength / swarm.n * ay

def wfi_bin(gamma, n_samples):
    ''' returns ring bin index of azimuth gamma in (-pi, pi] '''
    return min(int((gamma + PI) / (2. * PI / n_samples)), n_samples - 1)

def wfi_ring(swarm, i, r_min=R_MIN, n_samples=72):
    ''' returns piecewise-constant flow ring of agent i (one value per bin) '''
    ring   = [0.] * n_samples
    viewer = swarm.agent(i)
    for j in range(swarm.n):
        if j == i:
            continue
        target = swarm.agent(j)
        gamma  = relative_geometry(viewer, target).gamma_a
        ring[wfi_bin(gamma, n_samples)] += pairwise_flow(viewer, target, gamma, r_min)
    return ring

def wfi_midpoints(n_samples):
    width = 2. * PI / n_samples
    return [-PI + (k + .5) * width for k in range(n_samples)]

def wfi_feedback(swarm, i, K, r_min=R_MIN, n_samples=72, omega_max=OMEGA_MAX):
    ''' returns turn rate from the first sine harmonic of the flow ring '''
    if n_samples < 8:
        raise ValueError(f'n_samples should be 8 or more ({n_samples}).')
    width = 2. * PI / n_samples
    ring  = wfi_ring(swarm, i, r_min, n_samples)
    proj  = sum(q * math.sin(g) for q, g in zip(ring, wfi_midpoints(n_samples))) * width / PI
    return saturate(K * proj, omega_max)

# vectorized forms used by the simulation engine, row i = agent i

def pursuit_rates(gamma_sel, K, omega_max=OMEGA_MAX):
    return np.clip(K * gamma_sel, -omega_max, omega_max)

def los_rates(x, y, theta, v, rows, cols, r_min=R_MIN):
    ''' returns line-of-sight rates of the pairs (rows[k], cols[k]) '''
    dx   = x[cols] - x[rows]
    dy   = y[cols] - y[rows]
    th_t = np.arctan2(dy, dx)
    dvx  = v[cols] * np.cos(theta[cols]) - v[rows] * np.cos(theta[rows])
    dvy  = v[cols] * np.sin(theta[cols]) - v[rows] * np.sin(theta[rows])
    mu   = 1. / np.maximum(np.hypot(dx, dy), r_min)
    return mu * (dvy * np.cos(th_t) - dvx * np.sin(th_t))

def camouflage_rates(x, y, theta, v, rows, cols, K, r_min=R_MIN, omega_max=OMEGA_MAX):
    return np.clip(-K * los_rates(x, y, theta, v, rows, cols, r_min), -omega_max, omega_max)

def vicsek_headings(x, y, theta, radius, xi):
    ''' returns new headings for all agents given per-agent noise xi '''
    r    = np.hypot(x[None, :] - x[:, None], y[None, :] - y[:, None])
    near = (r <= radius).astype(float)
    return np.arctan2(near @ np.sin(theta), near @ np.cos(theta)) + xi

def cucker_smale_accels(x, y, vx, vy, strength, beta):
    ''' returns (ax, ay) arrays of the velocity-consensus rule '''
    r   = np.hypot(x[None, :] - x[:, None], y[None, :] - y[:, None])
    psi = (1. + r * r) ** -beta
    np.fill_diagonal(psi, 0.)
    deg = psi.sum(axis=1)
    k   = strength / len(x)
    return k * (psi @ vx - deg * vx), k * (psi @ vy - deg * vy)

def wfi_rates(gamma, qdot, K, n_samples=72, omega_max=OMEGA_MAX):
    ''' returns first-harmonic WFI turn rates from flow matrices '''
    width = 2. * PI / n_samples
    bins  = np.minimum(((gamma + PI) / width).astype(int), n_samples - 1)
    basis = np.sin(np.array(wfi_midpoints(n_samples)))[bins]
    q     = qdot.copy()
    np.fill_diagonal(q, 0.)
    return np.clip(K * (q * basis).sum(axis=1) * width / PI, -omega_max, omega_max)

# EOF
