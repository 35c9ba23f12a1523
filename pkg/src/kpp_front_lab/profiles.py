"""Growth-rate profiles g(y) for the shifting-environment KPP model.

Every profile is immutable and exposes its asymptotic rates ``r_minus`` =
g(-inf) and ``r_plus`` = g(+inf), its extrema, and an exact antiderivative so
that grid codes can use cell averages across discontinuities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .errors import ConfigError, NonPositiveProfile

__all__ = [
    "EnvironmentProfile",
    "Constant",
    "PiecewiseConstant",
    "ThreePatch",
    "TanhRamp",
    "Sampled",
    "evaluate",
    "reflect",
    "shift",
    "cell_average",
    "profile_from_dict",
]


class EnvironmentProfile:
    """Base class; concrete kinds are frozen dataclasses below."""

    kind: str = ""

    @property
    def r_minus(self) -> float:
        raise NotImplementedError

    @property
    def r_plus(self) -> float:
        raise NotImplementedError

    @property
    def inf_g(self) -> float:
        raise NotImplementedError

    @property
    def sup_g(self) -> float:
        raise NotImplementedError

    def __call__(self, y):
        return self.evaluate(y)

    def evaluate(self, y):
        raise NotImplementedError

    def antiderivative(self, y):
        """Some G with G' = g; only differences of G are meaningful."""
        raise NotImplementedError

    def core(self) -> tuple[float, float]:
        """Interval outside of which g is (close to) its asymptotic values."""
        raise NotImplementedError

    def reflect(self) -> "EnvironmentProfile":
        raise NotImplementedError

    def shift(self, a: float) -> "EnvironmentProfile":
        """Profile y -> g(y - a)."""
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    def _check_positive(self) -> None:
        if not self.inf_g > 0:
            raise NonPositiveProfile(f"{self.kind} profile has inf g = {self.inf_g} <= 0")


def _as_output(y, values):
    if np.ndim(y) == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class Constant(EnvironmentProfile):
    g0: float
    kind = "constant"

    def __post_init__(self):
        self._check_positive()

    r_minus = property(lambda self: float(self.g0))
    r_plus = property(lambda self: float(self.g0))
    inf_g = property(lambda self: float(self.g0))
    sup_g = property(lambda self: float(self.g0))

    def evaluate(self, y):
        return _as_output(y, np.full(np.shape(y), float(self.g0)))

    def antiderivative(self, y):
        return self.g0 * np.asarray(y, dtype=float)

    def core(self):
        return (0.0, 0.0)

    def reflect(self):
        return self

    def shift(self, a):
        return self

    def to_dict(self):
        return {"kind": self.kind, "g0": self.g0}


@dataclass(frozen=True)
class PiecewiseConstant(EnvironmentProfile):
    """g = values[k] on [breaks[k-1], breaks[k]), with breaks[-1] = -inf."""

    breaks: tuple[float, ...]
    values: tuple[float, ...]
    kind = "piecewise_constant"

    def __post_init__(self):
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != len(self.breaks) + 1:
            raise ConfigError("piecewise_constant needs len(values) == len(breaks) + 1")
        if any(b2 <= b1 for b1, b2 in zip(self.breaks, self.breaks[1:])):
            raise ConfigError("piecewise_constant breaks must be strictly ascending")
        self._check_positive()

    r_minus = property(lambda self: self.values[0])
    r_plus = property(lambda self: self.values[-1])
    inf_g = property(lambda self: min(self.values))
    sup_g = property(lambda self: max(self.values))

    def evaluate(self, y):
        idx = np.searchsorted(self.breaks, y, side="right")
        return _as_output(y, np.asarray(self.values)[idx])

    def antiderivative(self, y):
        y = np.asarray(y, dtype=float)
        b, v = self.breaks, self.values
        if not b:
            return v[0] * y
        out = v[0] * np.minimum(y - b[0], 0.0)
        for k in range(1, len(b)):
            out = out + v[k] * (np.clip(y, b[k - 1], b[k]) - b[k - 1])
        return out + v[-1] * np.maximum(y - b[-1], 0.0)

    def core(self):
        if not self.breaks:
            return (0.0, 0.0)
        return (self.breaks[0], self.breaks[-1])

    def reflect(self):
        # half-open intervals flip to (-b, ...]; only the break points themselves differ
        return PiecewiseConstant(tuple(-b for b in reversed(self.breaks)), tuple(reversed(self.values)))

    def shift(self, a):
        return PiecewiseConstant(tuple(b + a for b in self.breaks), self.values)

    def to_dict(self):
        return {"kind": self.kind, "breaks": list(self.breaks), "values": list(self.values)}


@dataclass(frozen=True)
class ThreePatch(EnvironmentProfile):
    """r_minus on y < 0, r_mid on [0, L), r_plus on y >= L."""

    r_minus_: float
    r_mid: float
    r_plus_: float
    L: float
    kind = "three_patch"

    def __post_init__(self):
        if not self.L > 0:
            raise ConfigError("three_patch needs L > 0")
        self._check_positive()

    r_minus = property(lambda self: float(self.r_minus_))
    r_plus = property(lambda self: float(self.r_plus_))
    inf_g = property(lambda self: float(min(self.r_minus_, self.r_mid, self.r_plus_)))
    sup_g = property(lambda self: float(max(self.r_minus_, self.r_mid, self.r_plus_)))

    def as_piecewise(self) -> PiecewiseConstant:
        return PiecewiseConstant((0.0, self.L), (self.r_minus_, self.r_mid, self.r_plus_))

    def evaluate(self, y):
        return self.as_piecewise().evaluate(y)

    def antiderivative(self, y):
        return self.as_piecewise().antiderivative(y)

    def core(self):
        return (0.0, float(self.L))

    def reflect(self):
        # mirror image has its patch on (-L, 0]; renormalised to [0, L)
        return ThreePatch(self.r_plus_, self.r_mid, self.r_minus_, self.L)

    def shift(self, a):
        return self.as_piecewise().shift(a)

    def to_dict(self):
        return {"kind": self.kind, "r_minus": self.r_minus_, "r_mid": self.r_mid,
                "r_plus": self.r_plus_, "L": self.L}


def _logcosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


@dataclass(frozen=True)
class TanhRamp(EnvironmentProfile):
    """Smooth monotone transition from r_minus to r_plus around ``center``."""

    r_minus_: float
    r_plus_: float
    steepness: float
    center: float = 0.0
    kind = "tanh_ramp"

    def __post_init__(self):
        if not self.steepness > 0:
            raise ConfigError("tanh_ramp needs steepness > 0")
        self._check_positive()

    r_minus = property(lambda self: float(self.r_minus_))
    r_plus = property(lambda self: float(self.r_plus_))
    inf_g = property(lambda self: float(min(self.r_minus_, self.r_plus_)))
    sup_g = property(lambda self: float(max(self.r_minus_, self.r_plus_)))

    def evaluate(self, y):
        z = self.steepness * (np.asarray(y, dtype=float) - self.center)
        val = self.r_minus_ + 0.5 * (self.r_plus_ - self.r_minus_) * (1.0 + np.tanh(z))
        # roundoff can overshoot the asymptote by an ulp
        val = np.clip(val, self.inf_g, self.sup_g)
        return _as_output(y, val)

    def antiderivative(self, y):
        y = np.asarray(y, dtype=float)
        z = self.steepness * (y - self.center)
        jump = self.r_plus_ - self.r_minus_
        return self.r_minus_ * y + 0.5 * jump * (y + _logcosh(z) / self.steepness)

    def core(self):
        # tanh is within 1e-16 of +-1 beyond |z| = 19
        w = 19.0 / self.steepness
        return (self.center - w, self.center + w)

    def reflect(self):
        return TanhRamp(self.r_plus_, self.r_minus_, self.steepness, -self.center)

    def shift(self, a):
        return TanhRamp(self.r_minus_, self.r_plus_, self.steepness, self.center + a)

    def to_dict(self):
        return {"kind": self.kind, "r_minus": self.r_minus_, "r_plus": self.r_plus_,
                "steepness": self.steepness, "center": self.center}


@dataclass(frozen=True)
class Sampled(EnvironmentProfile):
    """Linear interpolation of a table, declared asymptotes outside it."""

    positions: tuple[float, ...]
    rates: tuple[float, ...]
    r_minus_: float
    r_plus_: float
    kind = "sampled"

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(float(p) for p in self.positions))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if len(self.positions) != len(self.rates) or len(self.positions) < 2:
            raise ConfigError("sampled profile needs at least two (position, rate) pairs")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ConfigError("sampled positions must be strictly ascending")
        self._check_positive()

    r_minus = property(lambda self: float(self.r_minus_))
    r_plus = property(lambda self: float(self.r_plus_))
    inf_g = property(lambda self: float(min(min(self.rates), self.r_minus_, self.r_plus_)))
    sup_g = property(lambda self: float(max(max(self.rates), self.r_minus_, self.r_plus_)))

    def evaluate(self, y):
        y_arr = np.asarray(y, dtype=float)
        val = np.interp(y_arr, self.positions, self.rates)
        val = np.where(y_arr < self.positions[0], self.r_minus_, val)
        val = np.where(y_arr > self.positions[-1], self.r_plus_, val)
        return _as_output(y, val)

    def antiderivative(self, y):
        y = np.asarray(y, dtype=float)
        p = np.asarray(self.positions)
        r = np.asarray(self.rates)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (r[1:] + r[:-1]) * np.diff(p))])
        yc = np.clip(y, p[0], p[-1])
        k = np.clip(np.searchsorted(p, yc, side="right") - 1, 0, len(p) - 2)
        slope = (r[k + 1] - r[k]) / (p[k + 1] - p[k])
        dy = yc - p[k]
        inside = cum[k] + r[k] * dy + 0.5 * slope * dy * dy
        return (inside + self.r_minus_ * np.minimum(y - p[0], 0.0)
                + self.r_plus_ * np.maximum(y - p[-1], 0.0))

    def core(self):
        return (self.positions[0], self.positions[-1])

    def reflect(self):
        return Sampled(tuple(-q for q in reversed(self.positions)), tuple(reversed(self.rates)),
                       self.r_plus_, self.r_minus_)

    def shift(self, a):
        return Sampled(tuple(q + a for q in self.positions), self.rates, self.r_minus_, self.r_plus_)

    def to_dict(self):
        return {"kind": self.kind, "table": [[p, r] for p, r in zip(self.positions, self.rates)],
                "r_minus": self.r_minus_, "r_plus": self.r_plus_}


def evaluate(profile: EnvironmentProfile, y):
    return profile.evaluate(y)


def reflect(profile: EnvironmentProfile) -> EnvironmentProfile:
    return profile.reflect()


def shift(profile: EnvironmentProfile, a: float) -> EnvironmentProfile:
    return profile.shift(a)


def cell_average(profile: EnvironmentProfile, centers: np.ndarray, h: float) -> np.ndarray:
    """Exact average of g over [c - h/2, c + h/2] for each centre c."""
    centers = np.asarray(centers, dtype=float)
    return (profile.antiderivative(centers + 0.5 * h) - profile.antiderivative(centers - 0.5 * h)) / h


def profile_from_dict(d: dict[str, Any]) -> EnvironmentProfile:
    """Build a profile from its JSON description (see ``to_dict``)."""
    try:
        kind = d["kind"]
        if kind == "constant":
            return Constant(float(d["g0"]))
        if kind == "piecewise_constant":
            return PiecewiseConstant(tuple(d["breaks"]), tuple(d["values"]))
        if kind == "three_patch":
            return ThreePatch(float(d["r_minus"]), float(d["r_mid"]), float(d["r_plus"]), float(d["L"]))
        if kind == "tanh_ramp":
            return TanhRamp(float(d["r_minus"]), float(d["r_plus"]), float(d["steepness"]),
                            float(d.get("center", 0.0)))
        if kind == "sampled":
            table: Sequence[Sequence[float]] = d["table"]
            return Sampled(tuple(p for p, _ in table), tuple(r for _, r in table),
                           float(d["r_minus"]), float(d["r_plus"]))
    except KeyError as exc:
        raise ConfigError(f"profile description is missing field {exc}") from None
    raise ConfigError(f"unknown profile kind {d.get('kind')!r}")
