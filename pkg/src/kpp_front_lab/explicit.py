"""Explicit flux-limited solutions rho(s) of the stationary junction problem

    min{rho, rho + H(s, rho')} = 0                       for s > 0, s != c1,
    min{rho(c1), rho(c1) + F_A(rho'(c1+), rho'(c1-))} = 0,

with H(s, p) = -s p + p^2 + R(s), R = r_minus left of c1 and r_plus right of
it, and F_A = max(A, H^-(c1+, p+), H^+(c1-, p-)). The free boundary of rho
(the end of its zero set) is the spreading speed.

The solutions are assembled from three kinds of pieces: zero, affine
mu*s + b (characteristics through the junction) and the far-field parabola
s^2/4 - r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidInputs, PreconditionViolated
from .speeds import Regime, SpeedInputs, _mu_minus, _mu_plus, _pulled_speed, baseline_speed, rightward_speed

__all__ = [
    "Hamiltonian",
    "Piece",
    "PiecewiseSolution",
    "ResidualReport",
    "h_plus",
    "h_minus",
    "fa_junction",
    "construct_explicit",
    "construct_for_limiter",
    "baseline_solution",
    "verify_viscosity",
    "ishii_equivalence_check",
]


@dataclass(frozen=True)
class Hamiltonian:
    """H(s, p) = -s p + p^2 + R(s) with R piecewise constant between junctions.

    ``rates[k]`` is R on (junctions[k-1], junctions[k]]; a junction itself
    takes the value of the segment on its left.
    """

    junctions: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "junctions", tuple(float(c) for c in self.junctions))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if len(self.rates) != len(self.junctions) + 1:
            raise InvalidInputs("need one more rate than junctions")
        if any(b <= a for a, b in zip(self.junctions, self.junctions[1:])):
            raise InvalidInputs("junctions must be strictly increasing")

    @classmethod
    def single(cls, c1: float, r_minus: float, r_plus: float) -> "Hamiltonian":
        return cls((c1,), (r_minus, r_plus))

    def R(self, s):
        idx = np.searchsorted(self.junctions, s, side="left")
        out = np.asarray(self.rates)[idx]
        return float(out) if np.ndim(s) == 0 else out

    def side_rate(self, i: int, side: str) -> float:
        return self.rates[i + 1] if side == "+" else self.rates[i]

    def __call__(self, s, p):
        return -s * p + p * p + self.R(s)


def h_plus(c: float, r: float, p):
    """Nondecreasing part of p -> -c p + p^2 + r (flat below the minimiser c/2)."""
    q = np.maximum(p, c / 2.0)
    return -c * q + q * q + r


def h_minus(c: float, r: float, p):
    """Nonincreasing part of p -> -c p + p^2 + r (flat above the minimiser c/2)."""
    q = np.minimum(p, c / 2.0)
    return -c * q + q * q + r


def fa_junction(A: float, p_plus, p_minus, c1: float, r_minus: float, r_plus: float):
    """F_A(p+, p-) = max(A, H^-(c1+, p+), H^+(c1-, p-))."""
    return np.maximum(A, np.maximum(h_minus(c1, r_plus, p_plus), h_plus(c1, r_minus, p_minus)))


@dataclass(frozen=True)
class Piece:
    tag: str  # "zero", "affine" or "quadratic"
    lo: float
    hi: float
    slope: float = 0.0
    intercept: float = 0.0
    rate: float = 0.0  # quadratic piece is s^2/4 - rate

    def value(self, s):
        if self.tag == "zero":
            return np.zeros_like(s)
        if self.tag == "affine":
            return self.slope * s + self.intercept
        return s * s / 4.0 - self.rate

    def derivative(self, s):
        if self.tag == "zero":
            return np.zeros_like(s)
        if self.tag == "affine":
            return np.full_like(s, self.slope)
        return s / 2.0


def _zero(lo, hi):
    return Piece("zero", lo, hi)


def _affine(lo, hi, mu, b):
    return Piece("affine", lo, hi, slope=mu, intercept=b)


def _quad(lo, hi, r):
    return Piece("quadratic", lo, hi, rate=r)


@dataclass
class PiecewiseSolution:
    pieces: tuple[Piece, ...]
    c1: float
    r_minus: float
    r_plus: float
    flux_limiter: float
    s_hat: float
    regime: Optional[Regime] = None
    junction_value: float = field(init=False)

    def __post_init__(self):
        self.pieces = tuple(p for p in self.pieces if p.hi > p.lo)
        self.junction_value = float(self.evaluate(self.c1)) if self.c1 > 0 else float("nan")

    @property
    def breakpoints(self) -> list[float]:
        return [p.lo for p in self.pieces[1:]]

    @property
    def lambda1(self) -> float:
        return self.flux_limiter + self.c1 * self.c1 / 4.0

    def _index(self, s, side="left"):
        return np.searchsorted(self.breakpoints, s, side=side)

    def evaluate(self, s):
        s_arr = np.asarray(s, dtype=float)
        idx = self._index(s_arr)
        out = np.zeros_like(s_arr)
        for k, piece in enumerate(self.pieces):
            m = idx == k
            if np.any(m):
                out[m] = piece.value(s_arr[m])
        return float(out) if np.ndim(s) == 0 else out

    __call__ = evaluate

    def derivative(self, s, side: str = "right"):
        s_arr = np.asarray(s, dtype=float)
        idx = self._index(s_arr, side="right" if side == "right" else "left")
        out = np.zeros_like(s_arr)
        for k, piece in enumerate(self.pieces):
            m = idx == k
            if np.any(m):
                out[m] = piece.derivative(s_arr[m])
        return float(out) if np.ndim(s) == 0 else out

    def tags(self, s) -> list[str]:
        return [self.pieces[k].tag for k in np.atleast_1d(self._index(np.asarray(s, dtype=float)))]

    def continuity_gaps(self) -> list[float]:
        gaps = []
        for left, right in zip(self.pieces, self.pieces[1:]):
            b = right.lo
            gaps.append(abs(float(left.value(np.array(b))) - float(right.value(np.array(b)))))
        return gaps


def construct_explicit(inp: SpeedInputs) -> PiecewiseSolution:
    """The unique flux-limited solution with A = lambda1 - c1^2/4, case by case."""
    res = rightward_speed(inp)
    c, rm, rp, lam = inp.c1, inp.r_minus, inp.r_plus, inp.lambda1
    inf = math.inf
    if res.regime is Regime.KPP_RIGHT:
        s0 = 2.0 * math.sqrt(rp)
        pieces = [_zero(0.0, s0), _quad(s0, inf, rp)]
    elif res.regime is Regime.KEEP_PACE:
        d = math.sqrt(c * c - 4.0 * rp)
        a = (c + d) / 2.0
        pieces = [_zero(0.0, c), _affine(c, c + d, a, -a * c), _quad(c + d, inf, rp)]
    elif res.regime is Regime.NONLOCAL_PULLING:
        mu_m, mu_p = _mu_minus(c, rm, lam), _mu_plus(c, rp, lam)
        s2 = _pulled_speed(mu_m, rm)  # zero of the mu- characteristic
        pieces = [
            _zero(0.0, s2),
            _affine(s2, c, mu_m, -(mu_m * mu_m + rm)),
            _affine(c, 2.0 * mu_p, mu_p, -(mu_p * mu_p + rp)),
            _quad(2.0 * mu_p, inf, rp),
        ]
    else:
        mu_m, mu_p = _mu_minus(c, rm, lam), _mu_plus(c, rp, lam)
        s3 = 2.0 * math.sqrt(rm)
        pieces = [
            _zero(0.0, s3),
            _quad(s3, 2.0 * mu_m, rm),
            _affine(2.0 * mu_m, c, mu_m, -(mu_m * mu_m + rm)),
            _affine(c, 2.0 * mu_p, mu_p, -(mu_p * mu_p + rp)),
            _quad(2.0 * mu_p, inf, rp),
        ]
    # the free boundary is read off the construction: the end of its zero piece
    return PiecewiseSolution(tuple(pieces), c, rm, rp, lam - c * c / 4.0, pieces[0].hi, res.regime)


def construct_for_limiter(c1: float, r_minus: float, r_plus: float, A: float) -> PiecewiseSolution:
    """Solution for an arbitrary flux limiter A.

    Any A below A0 = max(r_minus, r_plus) - c1^2/4 acts exactly like A0, so
    the limiter is raised to A0 before building.
    """
    a0 = max(r_minus, r_plus) - c1 * c1 / 4.0
    lam = max(A, a0) + c1 * c1 / 4.0
    if A <= a0:
        lam = max(r_minus, r_plus)
    return construct_explicit(SpeedInputs(c1, r_minus, r_plus, lam))


def baseline_solution(c1: float, r_minus: float, r_plus: float) -> PiecewiseSolution:
    """Ishii solution built from g(+-inf) only (no eigenvalue information)."""
    c, rm, rp = float(c1), float(r_minus), float(r_plus)
    inf = math.inf
    kpp_r, kpp_l = 2.0 * math.sqrt(rp), 2.0 * math.sqrt(rm)
    if rm == rp or c <= kpp_r:
        pieces = [_zero(0.0, kpp_r), _quad(kpp_r, inf, rp)]
    elif rp > rm:
        gap = math.sqrt(rp - rm)
        mu = c / 2.0 - gap
        if c <= 2.0 * (math.sqrt(rm) + gap):
            sb = mu + rm / mu
            pieces = [_zero(0.0, sb), _affine(sb, c, mu, -(mu * mu + rm)), _quad(c, inf, rp)]
        else:
            pieces = [_zero(0.0, kpp_l), _quad(kpp_l, 2.0 * mu, rm),
                      _affine(2.0 * mu, c, mu, -(mu * mu + rm)), _quad(c, inf, rp)]
    elif c <= kpp_l:
        d = math.sqrt(c * c - 4.0 * rp)
        a = (c + d) / 2.0
        pieces = [_zero(0.0, c), _affine(c, c + d, a, -a * c), _quad(c + d, inf, rp)]
    else:
        mu = c / 2.0 + math.sqrt(rm - rp)
        pieces = [_zero(0.0, kpp_l), _quad(kpp_l, c, rm),
                  _affine(c, 2.0 * mu, mu, -(mu * mu + rp)), _quad(2.0 * mu, inf, rp)]
    s_hat = pieces[0].hi
    return PiecewiseSolution(tuple(pieces), c, rm, rp, max(rm, rp) - c * c / 4.0, s_hat)


@dataclass
class ResidualReport:
    tol: float
    classical: float = 0.0       # max |rho + H(s, rho')| where rho > 0
    obstacle: float = 0.0        # max of -(rho + H) on the zero set
    kink_super: float = math.inf  # min of rho + H over slopes touching from below
    kink_sub: float = -math.inf   # max of rho + H over slopes touching from above
    junction_sub: float = -math.inf
    junction_super: float = math.inf
    checks: dict[str, tuple[float, bool]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (self.classical <= self.tol and self.obstacle <= self.tol
                and self.kink_super >= -self.tol and self.kink_sub <= self.tol
                and self.junction_sub <= self.tol and self.junction_super >= -self.tol
                and all(ok for _, ok in self.checks.values()))

    def to_dict(self) -> dict:
        def clean(x):
            return None if not math.isfinite(x) else x

        return {
            "tol": self.tol,
            "classical": self.classical,
            "obstacle": self.obstacle,
            "kink_super": clean(self.kink_super),
            "kink_sub": clean(self.kink_sub),
            "junction_sub": clean(self.junction_sub),
            "junction_super": clean(self.junction_super),
            "checks": {k: {"value": v, "ok": ok} for k, (v, ok) in self.checks.items()},
            "passed": self.passed,
        }


def verify_viscosity(sol: PiecewiseSolution, H: Optional[Hamiltonian] = None, A: Optional[float] = None,
                     samples: int = 10_000, lattice: int = 21, tol: float = 1e-9) -> ResidualReport:
    """Check the sub/supersolution conditions of ``sol`` numerically.

    Smooth points are checked classically; kinks and the junction are checked
    against a lattice of one-sided test slopes, which is where the piecewise
    C^1 test functions can touch.
    """
    c = sol.c1
    H = H or Hamiltonian.single(c, sol.r_minus, sol.r_plus)
    A = sol.flux_limiter if A is None else A
    rep = ResidualReport(tol=tol)

    finite_bps = [b for b in sol.breakpoints if math.isfinite(b)]
    special = sorted(set(finite_bps + ([c] if c > 0 else [])))
    s_end = 1.5 * max(special + [sol.s_hat, 1.0]) + 1.0
    s = np.linspace(0.0, s_end, samples + 1)[1:]
    if special:
        near = np.min(np.abs(s[:, None] - np.asarray(special)[None, :]), axis=1) < 1e-9
        s = s[~near]
    rho = sol.evaluate(s)
    drho = sol.derivative(s)
    res = rho + H(s, drho)
    tags = np.array(sol.tags(s))
    zero = tags == "zero"
    if np.any(~zero):
        rep.classical = float(np.max(np.abs(res[~zero])))
    if np.any(zero):
        rep.obstacle = float(max(0.0, np.max(-res[zero])))

    for b in finite_bps:
        if c > 0 and b == c:
            continue
        v = float(sol.evaluate(b))
        left = float(sol.derivative(b, "left"))
        right = float(sol.derivative(b, "right"))
        if abs(right - left) <= 1e-12 * (1.0 + abs(left)):
            r = v + float(H(b, left))
            if v > tol:
                rep.classical = max(rep.classical, abs(r))
            else:
                rep.obstacle = max(rep.obstacle, max(0.0, -r))
            continue
        p = np.linspace(min(left, right), max(left, right), lattice)
        vals = v + H(np.full_like(p, b), p)
        if right > left:
            rep.kink_super = min(rep.kink_super, float(np.min(vals)))
        elif v > tol:
            rep.kink_sub = max(rep.kink_sub, float(np.max(vals)))

    if c > 0:
        v = sol.junction_value
        pr = float(sol.derivative(c, "right"))
        pl = float(sol.derivative(c, "left"))
        width = 3.0 * (1.0 + abs(c) + math.sqrt(max(sol.lambda1, 0.0)))
        ramp = np.linspace(0.0, width, lattice)
        # touching from below: psi'(c+) <= rho'(c+), psi'(c-) >= rho'(c-)
        P, M = np.meshgrid(pr - ramp, pl + ramp, indexing="ij")
        rep.junction_super = float(np.min(v + fa_junction(A, P, M, c, sol.r_minus, sol.r_plus)))
        if v > tol:
            P, M = np.meshgrid(pr + ramp, pl - ramp, indexing="ij")
            rep.junction_sub = float(np.max(v + fa_junction(A, P, M, c, sol.r_minus, sol.r_plus)))

    lam = sol.lambda1
    if sol.regime in (Regime.NONLOCAL_PULLING, Regime.KPP_LEFT):
        v = sol.junction_value
        plus = v + (-c * c / 4.0 + sol.r_plus)
        minus = v + (-c * c / 4.0 + sol.r_minus)
        rep.checks["junction_sub_plus"] = (plus, plus <= tol)
        rep.checks["junction_sub_minus"] = (minus, minus <= tol)
        rep.checks["junction_value_equals_minus_A"] = (v + A, abs(v + A) <= tol)
        mu_m = sol.pieces[1].slope if sol.regime is Regime.NONLOCAL_PULLING else sol.pieces[2].slope
        kink = sol.s_hat
        p = np.linspace(0.0, mu_m, lattice)
        worst = float(np.min(-kink * p + p * p + sol.r_minus))
        name = "s2_supersolution" if sol.regime is Regime.NONLOCAL_PULLING else "s3_supersolution"
        rep.checks[name] = (worst, worst >= -tol)
    if not math.isnan(lam) and sol.regime is not None:
        rep.checks["lambda1_vs_tails"] = (lam - max(sol.r_minus, sol.r_plus),
                                          lam >= max(sol.r_minus, sol.r_plus) - tol)
    return rep


def ishii_equivalence_check(inp: SpeedInputs, samples: int = 10_000, tol: float = 1e-10) -> bool:
    """At lambda1 = max(r+-) the flux-limited and Ishii solutions coincide.

    Raises PreconditionViolated when lambda1 > max(r_minus, r_plus).
    """
    if inp.lambda1 > max(inp.r_minus, inp.r_plus):
        raise PreconditionViolated("equivalence only holds when lambda1 = max(r_minus, r_plus)")
    fl = construct_explicit(inp)
    base = baseline_solution(inp.c1, inp.r_minus, inp.r_plus)
    s_end = 1.5 * max([b for b in fl.breakpoints + base.breakpoints if math.isfinite(b)] + [1.0]) + 1.0
    s = np.linspace(0.0, s_end, samples)
    gap = float(np.max(np.abs(fl.evaluate(s) - base.evaluate(s))))
    return gap < tol and fl.s_hat == baseline_speed(inp).c_star and fl.s_hat == base.s_hat


def sup_gap(a: PiecewiseSolution, b: PiecewiseSolution, s: Iterable[float]) -> float:
    s = np.asarray(list(s) if not isinstance(s, np.ndarray) else s, dtype=float)
    return float(np.max(np.abs(a.evaluate(s) - b.evaluate(s))))
