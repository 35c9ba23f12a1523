"""Shared hypothesis strategies."""

from hypothesis import strategies as st

from kpp_front_lab.speeds import SpeedInputs


@st.composite
def speed_inputs(draw, c_min=-2.0, c_max=12.0):
    rm = draw(st.floats(0.05, 5.0))
    rp = draw(st.floats(0.05, 5.0))
    lam = max(rm, rp) + draw(st.one_of(st.just(0.0), st.floats(0.0, 5.0)))
    c1 = draw(st.floats(c_min, c_max))
    return SpeedInputs(c1, rm, rp, lam)
