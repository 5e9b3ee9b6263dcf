# test_geom.py: angle arithmetic and agent state
# A part of STMR Swarm Tool
#
# Released under BSD 2-clause license.

import math

import numpy as np
import pytest

from libgeom import (PI, AgentState, ConfigError, NumericalError, SwarmState,
                     relative_geometry, unwrap_step, wrap_angle, wrap_array)

def test_wrap_angle_examples():
    assert wrap_angle(0.) == 0.
    assert wrap_angle(3. * PI) == pytest.approx(PI)
    assert wrap_angle(-PI) == PI
    assert wrap_angle(PI) == PI

def test_wrap_angle_interval_and_idempotence():
    rng = np.random.default_rng(1)
    for a in rng.uniform(-100., 100., 1000):
        w = wrap_angle(float(a))
        assert -PI < w <= PI
        assert wrap_angle(w) == w
        assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-9)

def test_wrap_angle_rejects_non_finite():
    for a in (math.nan, math.inf, -math.inf):
        with pytest.raises(ValueError):
            wrap_angle(a)

def test_wrap_array_matches_scalar():
    a = np.random.default_rng(2).uniform(-20., 20., 500)
    a[:3] = (-PI, PI, 3. * PI)
    assert list(wrap_array(a)) == [wrap_angle(float(x)) for x in a]

def test_unwrap_step_crosses_boundary():
    prev = PI - 0.01
    new  = wrap_angle(PI + 0.01)
    assert unwrap_step(prev, prev, new) == pytest.approx(PI + 0.01)

def test_agent_state_validation():
    a = AgentState(0., 0., 3. * PI, .1)
    assert a.theta == pytest.approx(PI)
    with pytest.raises(ValueError):
        AgentState(0., 0., 0., 0.)
    with pytest.raises(ValueError):
        AgentState(math.nan, 0., 0., .1)

def test_relative_geometry_examples():
    g = relative_geometry(AgentState(0., 0., 0., .1), AgentState(3., 4., 0., .1))
    assert g.r == 5.
    assert g.theta_t == math.atan2(4., 3.)
    g = relative_geometry(AgentState(0., 0., PI / 2., .1), AgentState(0., 1., 0., .1))
    assert g.gamma_a == 0.
    g = relative_geometry(AgentState(0., 0., 0., .1), AgentState(1., 0., 0., .1))
    assert g.gamma_b == PI

def test_relative_geometry_symmetry():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a = AgentState(*rng.uniform(-5., 5., 3), .1)
        b = AgentState(*rng.uniform(-5., 5., 3), .1)
        ab = relative_geometry(a, b)
        ba = relative_geometry(b, a)
        assert ab.r == ba.r
        assert wrap_angle(ab.theta_t - wrap_angle(ba.theta_t + PI)) == pytest.approx(0., abs=1e-14)

def test_swarm_state_views():
    agents = [AgentState(i, -i, .1 * i, .1) for i in range(3)]
    swarm = SwarmState.from_agents(agents, t=1.5)
    assert swarm.n == 3
    assert swarm.agents == agents
    assert swarm.agent(2) == agents[2]
    assert list(swarm.target) == [-1, -1, -1]
    assert np.isnan(swarm.peak).all()

def test_swarm_state_needs_two_agents():
    with pytest.raises(ConfigError):
        SwarmState.from_agents([AgentState(0., 0., 0., .1)])

def test_error_messages():
    assert str(ConfigError('bad', 4)) == 'line 4: bad'
    e = NumericalError('nan', step=3, agent=1)
    assert (e.step, e.agent, e.partial) == (3, 1, None)

# EOF
