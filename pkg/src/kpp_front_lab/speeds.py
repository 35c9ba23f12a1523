"""Closed-form rightward/leftward spreading speeds.

The speed depends only on the shift speed c1, the asymptotic rates
r_minus = g(-inf), r_plus = g(+inf) and the principal eigenvalue Lambda_1 of
the profile. Four regimes occur as c1 grows: the front ignores the shift
(KPP speed of the right tail), keeps pace with it, lags behind it while still
being pulled by the favourable core, or falls back to the KPP speed of the
left tail.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import InvalidInputs

__all__ = [
    "Regime",
    "SpeedInputs",
    "SpeedResult",
    "rightward_speed",
    "leftward_speed",
    "baseline_speed",
    "regime_boundaries",
]


class Regime(str, enum.Enum):
    KPP_RIGHT = "kpp_right"
    KEEP_PACE = "keep_pace"
    NONLOCAL_PULLING = "nonlocal_pulling"
    KPP_LEFT = "kpp_left"


@dataclass(frozen=True)
class SpeedInputs:
    c1: float
    r_minus: float
    r_plus: float
    lambda1: float

    def __post_init__(self):
        vals = (self.c1, self.r_minus, self.r_plus, self.lambda1)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInputs(f"non-finite speed inputs {vals}")
        if not (self.r_minus > 0 and self.r_plus > 0):
            raise InvalidInputs(f"asymptotic rates must be positive, got {self.r_minus}, {self.r_plus}")
        if self.lambda1 < max(self.r_minus, self.r_plus):
            raise InvalidInputs(
                f"lambda1 = {self.lambda1} is below max(r_minus, r_plus) = {max(self.r_minus, self.r_plus)}")

    @property
    def flux_limiter(self) -> float:
        return self.lambda1 - self.c1 * self.c1 / 4.0

    def mirrored(self) -> "SpeedInputs":
        """Inputs for the reflected problem v(t, x) = u(t, -x)."""
        return SpeedInputs(-self.c1, self.r_plus, self.r_minus, self.lambda1)


@dataclass(frozen=True)
class SpeedResult:
    c_star: float
    regime: Regime
    mu_minus: Optional[float] = None
    mu_plus: Optional[float] = None


def regime_boundaries(inp: SpeedInputs) -> tuple[float, float, float]:
    """c1 values separating the four regimes (each belongs to the lower regime)."""
    return (
        2.0 * math.sqrt(inp.r_plus),
        2.0 * math.sqrt(inp.lambda1),
        2.0 * (math.sqrt(inp.r_minus) + math.sqrt(inp.lambda1 - inp.r_minus)),
    )


def _mu_minus(c1: float, r_minus: float, lam: float) -> float:
    return c1 / 2.0 - math.sqrt(lam - r_minus)


def _mu_plus(c1: float, r_plus: float, lam: float) -> float:
    return c1 / 2.0 + math.sqrt(lam - r_plus)


def _pulled_speed(mu: float, r_minus: float) -> float:
    return mu + r_minus / mu


def rightward_speed(inp: SpeedInputs) -> SpeedResult:
    c1, rm, rp, lam = inp.c1, inp.r_minus, inp.r_plus, inp.lambda1
    b1, b2, b3 = regime_boundaries(inp)
    if c1 <= b1:
        return SpeedResult(2.0 * math.sqrt(rp), Regime.KPP_RIGHT)
    if c1 <= b2:
        return SpeedResult(c1, Regime.KEEP_PACE)
    mu_m = _mu_minus(c1, rm, lam)
    mu_p = _mu_plus(c1, rp, lam)
    if c1 <= b3:
        return SpeedResult(_pulled_speed(mu_m, rm), Regime.NONLOCAL_PULLING, mu_m, mu_p)
    return SpeedResult(2.0 * math.sqrt(rm), Regime.KPP_LEFT, mu_m, mu_p)


def leftward_speed(inp: SpeedInputs) -> SpeedResult:
    """Leftward speed, i.e. the rightward speed of the mirrored problem."""
    return rightward_speed(inp.mirrored())


def baseline_speed(inp: SpeedInputs) -> SpeedResult:
    """Speed predicted from g(+-inf) alone, ignoring any enhancement by the core.

    Written from the three sub-cases r_plus > r_minus, r_minus > r_plus and
    r_minus = r_plus rather than by calling ``rightward_speed``, so that the two
    can be checked against each other at lambda1 = max(r_minus, r_plus).
    """
    c1, rm, rp = inp.c1, inp.r_minus, inp.r_plus
    kpp_right, kpp_left = 2.0 * math.sqrt(rp), 2.0 * math.sqrt(rm)
    if rm == rp:
        return SpeedResult(kpp_right, Regime.KPP_RIGHT)
    if rp > rm:
        gap = math.sqrt(rp - rm)
        if c1 <= kpp_right:
            return SpeedResult(kpp_right, Regime.KPP_RIGHT)
        mu = c1 / 2.0 - gap
        if c1 <= 2.0 * (math.sqrt(rm) + gap):
            return SpeedResult(mu + rm / mu, Regime.NONLOCAL_PULLING, mu, c1 / 2.0)
        return SpeedResult(kpp_left, Regime.KPP_LEFT, mu, c1 / 2.0)
    if c1 <= kpp_right:
        return SpeedResult(kpp_right, Regime.KPP_RIGHT)
    if c1 <= kpp_left:
        return SpeedResult(c1, Regime.KEEP_PACE)
    return SpeedResult(kpp_left, Regime.KPP_LEFT, c1 / 2.0, c1 / 2.0 + math.sqrt(rm - rp))


def with_lambda1(inp: SpeedInputs, lam: float) -> SpeedInputs:
    return replace(inp, lambda1=lam)
