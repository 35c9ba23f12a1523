import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from kpp_front_lab.errors import ConfigError, NonPositiveProfile
from kpp_front_lab.profiles import (
    Constant,
    PiecewiseConstant,
    Sampled,
    TanhRamp,
    ThreePatch,
    cell_average,
    evaluate,
    profile_from_dict,
    reflect,
    shift,
)

rates = st.floats(0.1, 10.0)


def analytic_profiles():
    return st.one_of(
        st.builds(Constant, rates),
        st.builds(ThreePatch, rates, rates, rates, st.floats(0.05, 5.0)),
        st.builds(TanhRamp, rates, rates, st.floats(0.1, 5.0), st.floats(-3, 3)),
    )


def test_constant_value():
    assert evaluate(Constant(1.7), 5.0) == 1.7


def test_three_patch_values():
    p = ThreePatch(1, 3, 2, 1.0)
    assert evaluate(p, 0.5) == 3
    assert evaluate(p, -4.0) == 1
    assert evaluate(p, 1.0) == 2  # patch is half-open [0, L)
    assert evaluate(p, 0.0) == 3


def test_vector_evaluation_keeps_shape():
    p = ThreePatch(1, 3, 2, 1.0)
    y = np.array([[-1.0, 0.5], [2.0, 0.0]])
    np.testing.assert_array_equal(p.evaluate(y), [[1, 3], [2, 3]])


def test_three_patch_reflection():
    p = reflect(ThreePatch(1, 3, 2, 1.5))
    assert p == ThreePatch(2, 3, 1, 1.5)
    y = np.linspace(-4, 4, 81) + 0.013
    np.testing.assert_array_equal(p.evaluate(y), ThreePatch(1, 3, 2, 1.5).evaluate(-y + 1.5))


def test_constant_is_reflection_fixed_point():
    assert reflect(Constant(2.0)) == Constant(2.0)


def test_bump_extrema_exact():
    p = ThreePatch(1.2, 4.0, 2.5, 0.7)
    assert p.sup_g == 4.0 and p.inf_g == 1.2


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_nonpositive_rejected(bad):
    with pytest.raises(NonPositiveProfile):
        Constant(bad)
    with pytest.raises(NonPositiveProfile):
        ThreePatch(1.0, bad, 1.0, 1.0)


def test_malformed_fields_rejected():
    with pytest.raises(ConfigError):
        ThreePatch(1, 2, 1, 0.0)
    with pytest.raises(ConfigError):
        PiecewiseConstant((1.0, 0.0), (1, 2, 3))
    with pytest.raises(ConfigError):
        Sampled((0.0,), (1.0,), 1.0, 1.0)
    with pytest.raises(ConfigError):
        profile_from_dict({"kind": "nope"})
    with pytest.raises(ConfigError):
        profile_from_dict({"kind": "three_patch", "r_minus": 1})


def test_sampled_interpolates_and_extends():
    p = Sampled((0.0, 1.0, 2.0), (1.0, 3.0, 2.0), 0.5, 2.5)
    assert evaluate(p, 0.5) == pytest.approx(2.0)
    assert evaluate(p, -10.0) == 0.5
    assert evaluate(p, 10.0) == 2.5
    assert p.inf_g == 0.5 and p.sup_g == 3.0


@pytest.mark.parametrize("d", [
    {"kind": "constant", "g0": 1.5},
    {"kind": "piecewise_constant", "breaks": [0.0, 2.0], "values": [1.0, 2.0, 1.5]},
    {"kind": "three_patch", "r_minus": 1.0, "r_mid": 3.0, "r_plus": 2.0, "L": 1.0},
    {"kind": "tanh_ramp", "r_minus": 1.0, "r_plus": 2.0, "steepness": 0.5, "center": 1.0},
    {"kind": "sampled", "table": [[0, 1.0], [1, 2.0]], "r_minus": 1.0, "r_plus": 2.0},
])
def test_json_round_trip(d):
    p = profile_from_dict(d)
    assert profile_from_dict(p.to_dict()) == p


@settings(max_examples=60, deadline=None)
@given(analytic_profiles())
def test_asymptotes_match_far_evaluation(p):
    assert abs(evaluate(p, -1e6) - p.r_minus) < 1e-8
    assert abs(evaluate(p, 1e6) - p.r_plus) < 1e-8


@settings(max_examples=60, deadline=None)
@given(analytic_profiles(), st.lists(st.floats(-50, 50), min_size=1, max_size=20))
def test_values_within_extrema(p, ys):
    v = p.evaluate(np.array(ys))
    assert np.all(v >= p.inf_g) and np.all(v <= p.sup_g)


@settings(max_examples=60, deadline=None)
@given(analytic_profiles(), st.lists(st.floats(-50, 50), min_size=1, max_size=20))
def test_reflect_is_involution(p, ys):
    y = np.array(ys)
    np.testing.assert_array_equal(reflect(reflect(p)).evaluate(y), p.evaluate(y))


@settings(max_examples=40, deadline=None)
@given(analytic_profiles(), st.floats(-5, 5), st.floats(-20, 20))
def test_shift_translates(p, a, y):
    assume((y + a) - a == y)
    assert shift(p, a).evaluate(y + a) == pytest.approx(p.evaluate(y), abs=1e-12)


def test_cell_average_exact_across_jump():
    p = ThreePatch(1.0, 3.0, 2.0, 1.0)
    # cell [-0.05, 0.05] straddles the jump at 0: half 1, half 3
    assert cell_average(p, np.array([0.0]), 0.1)[0] == pytest.approx(2.0)
    assert cell_average(p, np.array([0.5]), 0.1)[0] == pytest.approx(3.0)


def test_tanh_antiderivative_matches_quadrature():
    p = TanhRamp(1.0, 2.0, 0.7, 0.3)
    y = np.linspace(-3, 3, 20001)
    v = p.evaluate(y)
    num = float(np.sum(0.5 * (v[1:] + v[:-1]) * np.diff(y)))
    assert p.antiderivative(3.0) - p.antiderivative(-3.0) == pytest.approx(num, rel=1e-8)
