import math

import numpy as np
import pytest

from kpp_front_lab.errors import ConfigError, DomainExhausted, LevelNotReached
from kpp_front_lab.profiles import PiecewiseConstant, ThreePatch
from kpp_front_lab.simulator import (
    Bump,
    SimConfig,
    Shift,
    front_speed,
    homogeneous_config,
    multi_shift_simulate,
    rate_function,
    simulate,
)


@pytest.fixture(scope="module")
def homogeneous_run():
    return simulate(homogeneous_config(1.0, t_end=60.0, dx=0.1, dt=0.05, snapshot_times=(30.0,)))


def test_homogeneous_speed(homogeneous_run):
    # the logarithmic Bramson delay keeps a short run a little below 2
    assert front_speed(homogeneous_run).fitted_speed == pytest.approx(2.0, abs=0.06)


def test_bounds_and_positivity(homogeneous_run):
    assert np.all(homogeneous_run.u_max <= 1.0 + 1e-9)
    assert homogeneous_run.u_min >= 0.0
    u = homogeneous_run.density(30.0)
    assert np.all(u >= 0) and np.all(u <= 1 + 1e-9)


def test_rate_function_shape(homogeneous_run):
    s, w = rate_function(homogeneous_run, 60.0, s=[0.5, 1.0, 2.3, 2.5])
    assert np.all(w[:2] < 0.05)
    # ahead of the front w approaches s^2/4 - 1 from above
    assert w[3] > w[2] > 0


def test_rate_function_outside_domain(homogeneous_run):
    with pytest.raises(ConfigError):
        rate_function(homogeneous_run, 60.0, s=[1e4])


def test_missing_snapshot(homogeneous_run):
    with pytest.raises(ConfigError):
        homogeneous_run.log_density(17.0)


def test_untracked_level(homogeneous_run):
    with pytest.raises(ConfigError):
        front_speed(homogeneous_run, level=0.123)


def test_level_not_reached():
    res = simulate(homogeneous_config(1.0, t_end=5.0, dx=0.1, dt=0.05, levels=(0.99,),
                                      u0=Bump(height=0.01)))
    with pytest.raises(LevelNotReached):
        front_speed(res, level=0.99)


def test_domain_exhausted():
    with pytest.raises(DomainExhausted):
        simulate(homogeneous_config(1.0, t_end=20.0, dx=0.1, dt=0.05, x_max=15.0))


@pytest.mark.parametrize("kw", [
    dict(scheme="leapfrog"),
    dict(dt=-1.0),
    dict(scheme="explicit_euler", dx=0.1, dt=0.01),
    dict(scheme="imex_crank_nicolson", dx=0.1, dt=0.05),
    dict(dx=0.01, dt=0.05),
])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        homogeneous_config(1.0, **kw)


def test_shift_validation():
    prof = ThreePatch(1, 3, 1, 1.0)
    with pytest.raises(ConfigError):
        SimConfig(prof, c1=3.0, shifts=(Shift(2.0, prof),))
    with pytest.raises(ConfigError):
        SimConfig(prof, c1=1.0, shifts=(Shift(2.0, PiecewiseConstant((0.0,), (2.0, 1.0))),))
    with pytest.raises(ConfigError):
        multi_shift_simulate(SimConfig(prof))


def test_schemes_agree():
    speeds = []
    for scheme, dt in (("imex_euler", 0.01), ("imex_crank_nicolson", 0.01), ("explicit_euler", 0.004)):
        cfg = homogeneous_config(1.0, t_end=30.0, dx=0.1, dt=dt, scheme=scheme)
        speeds.append(front_speed(simulate(cfg)).fitted_speed)
    assert max(speeds) - min(speeds) < 0.02


def test_fast_shift_leaves_speed_unchanged():
    # a rate bump moving much faster than the front is outrun and never felt
    prof = ThreePatch(1, 3, 1, 1.0)
    base = simulate(homogeneous_config(1.0, t_end=60.0, dx=0.1, dt=0.05))
    shifted = simulate(SimConfig(prof, c1=12.0, t_end=60.0, dx=0.1, dt=0.05,
                                 x_max=(12.0 + 0.25) * 60.0 + 30.0))
    a, b = front_speed(base).fitted_speed, front_speed(shifted).fitted_speed
    assert abs(a - b) / a < 0.02


def test_inactive_second_shift_within_two_percent():
    prof = ThreePatch(1, 3, 1, math.pi / 2)
    far = ThreePatch(1, 1.2, 1, 0.5)  # weak second bump that the front outruns
    one = simulate(SimConfig(prof, c1=2.5, t_end=80.0, dx=0.1, dt=0.05))
    two = multi_shift_simulate(SimConfig(prof, c1=2.5, t_end=80.0, dx=0.1, dt=0.05,
                                         shifts=(Shift(12.0, far),),
                                         x_max=(12.0 + 0.25) * 80.0 + 30.0))
    a, b = front_speed(one).fitted_speed, front_speed(two).fitted_speed
    assert abs(a - b) / a < 0.02
