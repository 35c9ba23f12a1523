import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kpp_front_lab.errors import PreconditionViolated
from kpp_front_lab.explicit import (
    Hamiltonian,
    baseline_solution,
    construct_explicit,
    construct_for_limiter,
    fa_junction,
    h_minus,
    h_plus,
    ishii_equivalence_check,
    verify_viscosity,
)
from kpp_front_lab.speeds import Regime, SpeedInputs, rightward_speed

from strategies import speed_inputs

CANONICAL = [(1.0, Regime.KPP_RIGHT), (2.5, Regime.KEEP_PACE), (3.0, Regime.NONLOCAL_PULLING),
             (5.0, Regime.KPP_LEFT)]


@pytest.mark.parametrize("c1,regime", CANONICAL)
def test_canonical_constructions(c1, regime):
    sol = construct_explicit(SpeedInputs(c1, 1, 1, 2))
    assert sol.regime is regime
    rep = verify_viscosity(sol)
    assert rep.passed, rep.to_dict()


def test_case_three_shape():
    sol = construct_explicit(SpeedInputs(3, 1, 1, 2))
    assert [p.tag for p in sol.pieces] == ["zero", "affine", "affine", "quadratic"]
    assert sol.s_hat == 2.5
    assert sol.junction_value == pytest.approx(-sol.flux_limiter, abs=1e-15)  # rho(c1) = -A
    assert sol.breakpoints == [2.5, 3.0, 5.0]


def test_case_two_tangent_join():
    sol = construct_explicit(SpeedInputs(2.5, 1, 1, 2))
    end = sol.breakpoints[-1]
    assert sol.derivative(end, "left") == pytest.approx(sol.derivative(end, "right"), abs=1e-12)


def test_named_inequalities():
    rep = verify_viscosity(construct_explicit(SpeedInputs(3, 1, 1, 2)))
    value, ok = rep.checks["junction_sub_minus"]
    assert ok and value == pytest.approx(1 - 2)  # rho3(c1) + H(c1-, c1/2) = r- - Lambda1
    rep = verify_viscosity(construct_explicit(SpeedInputs(5, 1, 1, 2)))
    assert rep.checks["s3_supersolution"][1]


def test_verifier_rejects_wrong_speed():
    sol = construct_explicit(SpeedInputs(3, 1, 1, 2))
    # the same pieces judged against a different limiter break the junction condition
    assert not verify_viscosity(sol, A=sol.flux_limiter + 0.3).passed
    assert not verify_viscosity(sol, A=sol.flux_limiter - 0.3).passed


def test_hamiltonian_envelopes():
    c, r = 3.0, 1.0
    p = np.linspace(-3, 6, 91)
    full = -c * p + p * p + r
    assert np.all(h_plus(c, r, p) >= h_plus(c, r, p - 0.1) - 1e-15)
    assert np.all(h_minus(c, r, p) <= h_minus(c, r, p - 0.1) + 1e-15)
    np.testing.assert_allclose(np.maximum(h_plus(c, r, p), h_minus(c, r, p)), full)


def test_hamiltonian_junction_uses_left_rate():
    H = Hamiltonian.single(3.0, 1.0, 2.0)
    assert H.R(3.0) == 1.0 and H.R(3.0001) == 2.0
    assert H(2.0, 1.0) == -2 + 1 + 1


def test_fa_floor_is_limiter():
    assert fa_junction(0.7, 10.0, -10.0, 3.0, 1.0, 1.0) >= 0.7
    assert fa_junction(0.7, 1.5, 1.5, 3.0, 1.0, 1.0) == 0.7


def test_limiter_clamp_below_a0():
    a0 = 1.0 - 9.0 / 4.0
    low = construct_for_limiter(3.0, 1.0, 1.0, a0 - 5.0)
    at = construct_for_limiter(3.0, 1.0, 1.0, a0)
    s = np.linspace(0, 10, 1001)
    np.testing.assert_array_equal(low.evaluate(s), at.evaluate(s))


@settings(max_examples=150, deadline=None)
@given(speed_inputs(c_min=0.01))
def test_random_constructions_are_viscosity_solutions(inp):
    sol = construct_explicit(inp)
    assert max(sol.continuity_gaps() or [0.0]) < 1e-9 * (1 + inp.c1 ** 2 + inp.lambda1)
    s = np.linspace(0, 3 * (1 + inp.c1 + math.sqrt(inp.lambda1)), 500)
    v = sol.evaluate(s)
    assert np.all(v >= 0) and np.all(np.diff(v) >= -1e-12)
    rep = verify_viscosity(sol, samples=2000, tol=1e-8 * (1 + inp.c1 ** 2 + inp.lambda1))
    assert rep.passed, rep.to_dict()


@settings(max_examples=150, deadline=None)
@given(speed_inputs(), st.floats(0.0, 3.0))
def test_monotone_in_limiter(inp, bump):
    lo = construct_explicit(inp)
    hi = construct_explicit(SpeedInputs(inp.c1, inp.r_minus, inp.r_plus, inp.lambda1 + bump))
    s = np.linspace(0, 20, 400)
    assert np.all(hi.evaluate(s) <= lo.evaluate(s) + 1e-9)
    assert hi.s_hat >= lo.s_hat - 1e-12


@settings(max_examples=200, deadline=None)
@given(speed_inputs())
def test_free_boundary_is_formula_speed(inp):
    sol = construct_explicit(inp)
    assert sol.s_hat == rightward_speed(inp).c_star
    assert sol.evaluate(sol.s_hat) == 0.0
    assert sol.evaluate(sol.s_hat + 1e-6) > 0.0


@settings(max_examples=200, deadline=None)
@given(speed_inputs())
def test_ishii_equivalence(inp):
    inp = SpeedInputs(inp.c1, inp.r_minus, inp.r_plus, max(inp.r_minus, inp.r_plus))
    assert ishii_equivalence_check(inp)


def test_equivalence_needs_tail_max():
    with pytest.raises(PreconditionViolated):
        ishii_equivalence_check(SpeedInputs(3, 1, 1, 2))


@pytest.mark.parametrize("rm,rp", [(1.0, 2.0), (2.0, 1.0), (1.0, 1.0)])
def test_baseline_solutions_pass_verifier(rm, rp):
    for c1 in np.linspace(0.2, 8, 12):
        sol = baseline_solution(c1, rm, rp)
        assert verify_viscosity(sol).passed
