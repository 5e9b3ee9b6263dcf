#! /usr/bin/env python3
# -*- coding: utf-8 -*-
#
# libmetrics.py: bi-agent stability, interaction graphs and order statistics
# A part of STMR Swarm Tool
#
# Released under BSD 2-clause license.
#
# With K_b = 0 the bi-agent error dynamics linearize about the origin to
#
#   d/dt [gamma_a, gamma_b] = [[alpha - K_a, alpha], [-alpha, -alpha]] [gamma_a, gamma_b],
#
# whose characteristic polynomial s^2 + K_a s + K_a alpha has positive
# coefficients for K_a > 0, alpha > 0.

import math
import sys
from dataclasses import dataclass

import libtrace
from   libctrl import ControllerConfig, STMR_KINDS
from   libflow import R_MIN

try:
    import numpy as np
    from scipy.integrate import cumulative_trapezoid, solve_ivp
    from scipy.sparse.csgraph import connected_components
except ModuleNotFoundError:
    libtrace.err('''\
    This code needs numpy and scipy modules.
    Please install this module such as \"pip install numpy scipy\".
    ''')
    sys.exit(1)

POL_EPS = 1e-12  # resultant length treated as zero

@dataclass(frozen=True)
class BiAgentParams:
    K_a  : float  # viewer gain [1/s]
    K_b  : float  # target gain [1/s]
    alpha: float  # v * mu [1/s]

def biagent_error_rhs(gamma_a, gamma_b, p):
    ''' returns (dgamma_a, dgamma_b) of the bi-agent error dynamics '''
    s = p.alpha * math.sin(gamma_a) + p.alpha * math.sin(gamma_b)
    return s - p.K_a * gamma_a, p.K_b * gamma_b - s

def biagent_linearization(p):
    if p.K_b != 0.:
        raise ValueError(f'linearization assumes K_b = 0 ({p.K_b}).')
    return np.array([[p.alpha - p.K_a, p.alpha], [-p.alpha, -p.alpha]])

def eig2(m):
    ''' returns both eigenvalues of a 2x2 matrix sorted by (real, imag) '''
    tr   = float(m[0][0] + m[1][1])
    det  = float(m[0][0] * m[1][1] - m[0][1] * m[1][0])
    disc = tr * tr - 4. * det
    if disc >= 0.:
        sq = math.sqrt(disc)
        roots = [complex((tr - sq) / 2.), complex((tr + sq) / 2.)]
    else:
        sq = math.sqrt(-disc)
        roots = [complex(tr / 2., -sq / 2.), complex(tr / 2., sq / 2.)]
    return sorted(roots, key=lambda z: (z.real, z.imag))

def integrate_biagent(gamma0, p, t_end, n_points=501):
    ''' returns (t, gamma) with gamma of shape (2, n_points) '''
    t_eval = np.linspace(0., t_end, n_points)
    sol = solve_ivp(lambda t, g: biagent_error_rhs(g[0], g[1], p), (0., t_end),
                    list(gamma0), method='RK45', t_eval=t_eval, rtol=1e-10, atol=1e-13)
    if not sol.success:
        raise RuntimeError(f'error dynamics integration failed: {sol.message}')
    return sol.t, sol.y

def stability_table(ka_values, alpha_values):
    ''' returns rows (K_a, alpha, re1, im1, re2, im2, stable) over the grid '''
    rows = []
    for ka in ka_values:
        for alpha in alpha_values:
            if not alpha > 0.:
                raise ValueError(f'alpha should be positive ({alpha}).')
            e1, e2 = eig2(biagent_linearization(BiAgentParams(ka, 0., alpha)))
            rows.append((float(ka), float(alpha), e1.real, e1.imag, e2.real, e2.imag,
                         e1.real < 0. and e2.real < 0.))
    return rows

# heading statistics

def _resultant(headings):
    a = np.asarray(headings, dtype=float)
    if a.shape[-1] == 0:
        raise ValueError('heading list is empty.')
    return np.sin(a).sum(axis=-1), np.cos(a).sum(axis=-1), a.shape[-1]

def polarization(headings):
    ''' returns length of the mean heading unit vector '''
    ss, cs, n = _resultant(headings)
    return float(min(np.hypot(ss, cs) / n, 1.))

def circular_mean_and_variance(headings):
    ''' returns (mean, variance); mean is None when the headings cancel out '''
    ss, cs, n = _resultant(headings)
    pol = min(float(np.hypot(ss, cs) / n), 1.)
    mean = math.atan2(ss, cs) if pol > POL_EPS else None
    return mean, 1. - pol

# interaction graphs

@dataclass
class InteractionGraph:
    n      : int
    weights: np.ndarray  # symmetric, zero diagonal, nonnegative

    @property
    def edge_count(self):
        return int(np.count_nonzero(np.triu(self.weights, 1)))

def _distances(x, y):
    return np.hypot(x[None, :] - x[:, None], y[None, :] - y[:, None])

def graph_weights(kind, x, y, target, params, r_min=R_MIN, active=None):
    ''' returns the symmetric weight matrix of the interaction graph '''
    n = len(x)
    if kind in STMR_KINDS:
        w = np.zeros((n, n))
        for i, j in enumerate(target):
            if j >= 0 and j != i:
                w[i, j] = w[j, i] = 1.
        return w
    r = _distances(x, y)
    if kind == 'vicsek':
        w = (r <= params.vicsek_radius).astype(float)
    elif kind == 'cucker_smale':
        w = (1. + r * r) ** -params.cs_beta
    else:  # wfi
        w = 1. / np.maximum(r, r_min)
    np.fill_diagonal(w, 0.)
    if active is not None and not active.all():
        w = np.where(active[:, None] | active[None, :], w, 0.)
    return w

def build_graph(kind, state, params=None, r_min=R_MIN, active=None):
    ''' returns the underlying undirected graph of who reacts to whom '''
    params = params if params is not None else ControllerConfig(kind=kind)
    w = graph_weights(kind, np.asarray(state.x), np.asarray(state.y),
                      np.asarray(state.target), params, r_min, active)
    return InteractionGraph(len(w), w)

def laplacian(graph):
    w = graph.weights
    return np.diag(w.sum(axis=1)) - w

def component_count(graph):
    return int(connected_components(graph.weights, directed=False)[0])

def fiedler(graph):
    ''' returns the second-smallest Laplacian eigenvalue, exactly 0 when
        the graph is disconnected '''
    if graph.n < 2:
        raise ValueError(f'Fiedler value needs two or more nodes ({graph.n}).')
    if component_count(graph) > 1:
        return 0.
    return max(float(np.linalg.eigvalsh(laplacian(graph))[1]), 0.)

def union_graph(a, b):
    if a.n != b.n:
        raise ValueError(f'graph sizes differ ({a.n} != {b.n}).')
    return InteractionGraph(a.n, np.maximum(a.weights, b.weights))

def union_graph_series(graphs):
    ''' returns the running union; step k holds the max weight up to k.
        A step that adds no weight shares the previous union object. '''
    series = []
    for g in graphs:
        if not series:
            series.append(g)
        elif g.n != series[-1].n:
            raise ValueError(f'graph sizes differ ({series[-1].n} != {g.n}).')
        elif (g.weights > series[-1].weights).any():
            series.append(union_graph(series[-1], g))
        else:
            series.append(series[-1])
    return series

def attentional_work(fiedler_series, dt):
    ''' returns the cumulative trapezoidal area under the union Fiedler series '''
    f = np.asarray(fiedler_series, dtype=float)
    if len(f) == 0:
        return f
    return cumulative_trapezoid(f, dx=dt, initial=0.)

@dataclass
class MetricsSeries:
    time_s          : np.ndarray
    polarization    : np.ndarray
    mean_heading    : np.ndarray  # nan where the headings cancel out
    circ_variance   : np.ndarray
    linear_variance : np.ndarray  # variance of unwrapped headings [rad^2]
    fiedler_instant : np.ndarray
    fiedler_union   : np.ndarray
    attentional_work: np.ndarray
    edge_count      : np.ndarray
    component_count : np.ndarray

    def __len__(self):
        return len(self.time_s)

def metrics_series(log, cfg):
    ''' returns MetricsSeries of a recorded run, one entry per snapshot '''
    kind   = cfg.controller.kind
    n_snap = len(log.t)
    n      = log.x.shape[1]
    active = None
    if cfg.single_agent:
        active = np.zeros(n, dtype=bool)
        active[0] = True
    ss, cs, _ = _resultant(log.theta)
    pol  = np.minimum(np.hypot(ss, cs) / n, 1.)
    mean = np.where(pol > POL_EPS, np.arctan2(ss, cs), np.nan)
    f_inst  = np.zeros(n_snap)
    f_union = np.zeros(n_snap)
    edges   = np.zeros(n_snap, dtype=int)
    comps   = np.zeros(n_snap, dtype=int)
    def instant_graphs():
        for k in range(n_snap):
            g = InteractionGraph(n, graph_weights(
                kind, log.x[k], log.y[k], log.target[k], cfg.controller, cfg.r_min, active))
            f_inst[k] = fiedler(g)
            edges[k]  = g.edge_count
            comps[k]  = component_count(g)
            yield g
    unions = union_graph_series(instant_graphs())
    for k, u in enumerate(unions):
        f_union[k] = f_union[k - 1] if k and u is unions[k - 1] else fiedler(u)
    return MetricsSeries(
        time_s           = np.asarray(log.t, dtype=float),
        polarization     = pol,
        mean_heading     = mean,
        circ_variance    = 1. - pol,
        linear_variance  = np.var(log.theta_unwrapped, axis=1),
        fiedler_instant  = f_inst,
        fiedler_union    = f_union,
        attentional_work = attentional_work(f_union, cfg.dt),
        edge_count       = edges,
        component_count  = comps)

# EOF
