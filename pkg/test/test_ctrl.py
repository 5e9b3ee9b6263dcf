# test_ctrl.py: steering laws
# A part of STMR Swarm Tool
#
# Released under BSD 2-clause license.

import math

import numpy as np
import pytest

import libctrl
import libflow
from   libctrl import (ControllerConfig, cucker_smale_accel, los_rate, motion_camouflage,
                       pure_pursuit, saturate, vicsek_heading, wfi_feedback)
from   libflow import StmdOutput, flow_matrix
from   libgeom import PI, AgentState, ConfigError, SwarmState, relative_geometry

def sense(azimuth):
    return StmdOutput(1., azimuth, 1)

def random_swarm(rng, n):
    return SwarmState(
        0., rng.uniform(0., 5., n), rng.uniform(0., 5., n), rng.uniform(-PI, PI, n),
        rng.uniform(.05, .2, n), rng.uniform(-.5, .5, n))

def test_controller_config_validation():
    ControllerConfig()
    for bad in ({'kind': 'boids'}, {'gain_K': 0.}, {'omega_max': -1.},
                {'vicsek_radius': 0.}, {'cs_speed_spread': 1.}, {'wfi_samples': 4}):
        with pytest.raises(ConfigError):
            ControllerConfig(**bad)

def test_pure_pursuit_examples():
    assert pure_pursuit(sense(0.), .1) == 0.
    assert pure_pursuit(sense(.3), .1) == pytest.approx(.03)
    for g in np.linspace(-PI, PI, 11):
        assert pure_pursuit(sense(-g), .7) == -pure_pursuit(sense(g), .7)
    assert pure_pursuit(sense(3.), 10.) == libctrl.OMEGA_MAX

def test_saturate_bounds():
    assert saturate(100.) == 2.84
    assert saturate(-100., 1.) == -1.

def test_motion_camouflage_examples():
    a = AgentState(0., 0., .4, .1)
    b = AgentState(1., 2., .4, .1)
    assert motion_camouflage(a, b, 1.) == pytest.approx(0., abs=1e-15)
    a = AgentState(0., 0., 0., 1.)
    b = AgentState(1., 0., 0., 1.)
    assert motion_camouflage(a, b, 1.) == pytest.approx(0., abs=1e-15)
    # target crosses the line of sight at unit distance with 0.1 m/s
    a = AgentState(0., 0., 0., .1)
    b = AgentState(1., 0., PI / 2., .1)
    assert abs(motion_camouflage(a, b, 1.)) == pytest.approx(.1)

def test_los_rate_matches_finite_difference():
    rng = np.random.default_rng(7)
    dt = 1e-5
    for _ in range(100):
        a = AgentState(*rng.uniform(-3., 3., 3), rng.uniform(.05, .3))
        b = AgentState(*rng.uniform(-3., 3., 3), rng.uniform(.05, .3))
        if relative_geometry(a, b).r < .2:
            continue
        def moved(s, h):
            return AgentState(s.x + s.xdot * h, s.y + s.ydot * h, s.theta, s.v)
        ahead  = relative_geometry(moved(a, dt), moved(b, dt)).theta_t
        behind = relative_geometry(moved(a, -dt), moved(b, -dt)).theta_t
        rate   = math.remainder(ahead - behind, 2. * PI) / (2. * dt)
        assert los_rate(a, b) == pytest.approx(rate, abs=1e-6)
        assert motion_camouflage(a, b, .5, omega_max=100.) == pytest.approx(-.5 * rate, abs=1e-6)

def test_vicsek_examples():
    rng = np.random.default_rng(8)
    swarm = SwarmState.from_agents([AgentState(0., 0., .7, .1), AgentState(10., 0., 0., .1)])
    assert vicsek_heading(swarm, 0, 2., 0., rng) == pytest.approx(.7)
    swarm = SwarmState.from_agents([
        AgentState(0., 0., 0., .1), AgentState(1., 0., .2, .1), AgentState(0., 1., -.2, .1)])
    assert vicsek_heading(swarm, 0, 2., 0., rng) == pytest.approx(0., abs=1e-15)
    swarm = SwarmState.from_agents([AgentState(i, 0., 1.1, .1) for i in range(4)])
    for i in range(4):
        assert vicsek_heading(swarm, i, 2., 0., rng) == pytest.approx(1.1)

def test_vicsek_noise_stays_in_band():
    rng = np.random.default_rng(9)
    swarm = SwarmState.from_agents([AgentState(0., 0., 0., .1), AgentState(.5, 0., 0., .1)])
    draws = [vicsek_heading(swarm, 0, 2., .1, rng) for _ in range(500)]
    assert max(abs(d) for d in draws) <= .05

def test_vicsek_vectorized_matches_scalar():
    rng = np.random.default_rng(10)
    swarm = random_swarm(rng, 12)
    xi = np.zeros(12)
    new = libctrl.vicsek_headings(swarm.x, swarm.y, swarm.theta, 2., xi)
    for i in range(12):
        assert math.remainder(new[i] - vicsek_heading(swarm, i, 2., 0., rng), 2. * PI) == \
            pytest.approx(0., abs=1e-12)

def test_cucker_smale_examples():
    swarm = SwarmState.from_agents([AgentState(i, 2. * i, .5, .1) for i in range(4)])
    for i in range(4):
        ax, ay = cucker_smale_accel(swarm, i, 1., .5)
        assert ax == pytest.approx(0., abs=1e-15) and ay == pytest.approx(0., abs=1e-15)
    swarm = SwarmState.from_agents([AgentState(0., 0., 0., .1), AgentState(1., 1., PI, .1)])
    a0 = cucker_smale_accel(swarm, 0, 1., .5)
    a1 = cucker_smale_accel(swarm, 1, 1., .5)
    assert a0[0] == pytest.approx(-a1[0]) and a0[1] == pytest.approx(-a1[1], abs=1e-15)

def test_cucker_smale_conserves_momentum():
    rng = np.random.default_rng(11)
    for _ in range(20):
        swarm = random_swarm(rng, 5)
        acc = [cucker_smale_accel(swarm, i, 1., .5) for i in range(5)]
        assert sum(a[0] for a in acc) == pytest.approx(0., abs=1e-10)
        assert sum(a[1] for a in acc) == pytest.approx(0., abs=1e-10)
        vx = swarm.v * np.cos(swarm.theta)
        vy = swarm.v * np.sin(swarm.theta)
        ax, ay = libctrl.cucker_smale_accels(swarm.x, swarm.y, vx, vy, 1., .5)
        assert np.allclose(ax, [a[0] for a in acc], atol=1e-14)
        assert np.allclose(ay, [a[1] for a in acc], atol=1e-14)

def test_wfi_examples():
    # agents at rest relative to the viewer produce an empty ring
    swarm = SwarmState.from_agents([AgentState(i, 0., 0., .1) for i in range(3)])
    assert wfi_feedback(swarm, 0, 1.) == 0.
    # even ring: neighbors at the bin centres +-62.5 deg whose relative
    # velocities (dvx, dvy) and (-dvx, dvy) give equal flows
    g = math.radians(62.5)
    def moving(x, y, dvx, dvy):
        vx, vy = .1 + dvx, dvy
        return AgentState(x, y, math.atan2(vy, vx), math.hypot(vx, vy))
    swarm = SwarmState.from_agents([
        AgentState(0., 0., 0., .1),
        moving(math.cos(g),  math.sin(g),  .05, .08),
        moving(math.cos(g), -math.sin(g), -.05, .08)])
    ring = libctrl.wfi_ring(swarm, 0)
    hit  = [q for q in ring if q != 0.]
    assert len(hit) == 2 and hit[0] == pytest.approx(hit[1], abs=1e-15)
    assert abs(hit[0]) > 1e-3
    assert wfi_feedback(swarm, 0, 1.) == pytest.approx(0., abs=1e-15)

def test_wfi_single_neighbor_at_left():
    # neighbor straight to the left moving forward faster: qdot = mu * dvx
    viewer = AgentState(0., 0., 0., .1)
    other  = AgentState(0., 1., 0., .3)
    swarm  = SwarmState.from_agents([viewer, other])
    n      = 72
    ring   = libctrl.wfi_ring(swarm, 0, n_samples=n)
    k      = libctrl.wfi_bin(PI / 2., n)
    assert ring[k] == pytest.approx(.2)
    mid    = libctrl.wfi_midpoints(n)[k]
    expect = .5 * .2 * math.sin(mid) * (2. * PI / n) / PI
    assert wfi_feedback(swarm, 0, .5, n_samples=n) == pytest.approx(expect)
    assert expect == pytest.approx(.5 * .2 * (2. * PI / n) / PI, rel=1e-3)

def test_wfi_vectorized_matches_scalar():
    rng = np.random.default_rng(12)
    swarm = random_swarm(rng, 9)
    gamma, qdot, _, _ = flow_matrix(swarm.x, swarm.y, swarm.theta, swarm.v, swarm.omega)
    rates = libctrl.wfi_rates(gamma, qdot, .3)
    for i in range(9):
        assert rates[i] == pytest.approx(wfi_feedback(swarm, i, .3), abs=1e-12)

def test_outputs_are_bounded():
    rng = np.random.default_rng(13)
    for _ in range(20):
        swarm = random_swarm(rng, 6)
        for i in range(6):
            for u in (wfi_feedback(swarm, i, 50.),
                      motion_camouflage(swarm.agent(i), swarm.agent((i + 1) % 6), 50.)):
                assert math.isfinite(u) and abs(u) <= libctrl.OMEGA_MAX

def test_flow_matrix_is_unchecked_outside_flow_tests():
    # the scalar comparison loop is enabled only in the flow and engine tests
    assert not libflow.SELF_CHECK

# EOF
