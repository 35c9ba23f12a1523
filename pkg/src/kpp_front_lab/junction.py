"""Monotone grid solver for min{rho, rho + H(s, rho')} = 0 with junctions.

The interior flux is the Godunov Hamiltonian of the convex H,
max(H^+(s, D^- rho), H^-(s, D^+ rho)); at a junction node the same two
envelopes enter together with the flux limiter. Every nodewise equation is
strictly increasing in the unknown and is solved in closed form, and the
nodes are relaxed by alternating Gauss-Seidel sweeps.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from numba import njit

from .errors import ConfigError, GridMisaligned, NoConvergence
from .explicit import Hamiltonian

__all__ = [
    "JunctionProblem",
    "GridSolution",
    "node_update",
    "solve",
    "multi_junction_speed",
    "load_problem",
]


@dataclass(frozen=True)
class JunctionProblem:
    """Junctions c_1 < ... < c_n in (0, s_max), n + 1 segment rates, n limiters."""

    junctions: tuple[float, ...]
    segment_rates: tuple[float, ...]
    flux_limiters: tuple[float, ...]
    s_max: float

    def __post_init__(self):
        object.__setattr__(self, "junctions", tuple(float(c) for c in self.junctions))
        object.__setattr__(self, "segment_rates", tuple(float(r) for r in self.segment_rates))
        object.__setattr__(self, "flux_limiters", tuple(float(a) for a in self.flux_limiters))
        n = len(self.junctions)
        if len(self.segment_rates) != n + 1 or len(self.flux_limiters) != n:
            raise ConfigError("need n junctions, n + 1 segment rates and n flux limiters")
        if any(r <= 0 for r in self.segment_rates):
            raise ConfigError("segment rates must be positive")
        if any(b <= a for a, b in zip(self.junctions, self.junctions[1:])):
            raise ConfigError("junctions must be strictly increasing")
        if n and not (0.0 < self.junctions[0] and self.junctions[-1] < self.s_max):
            raise ConfigError("junctions must lie inside (0, s_max)")
        if self.s_max <= self.min_s_max():
            raise ConfigError(f"s_max must exceed {self.min_s_max():.6g} so the far-field "
                              "parabola is reached inside the domain")

    @classmethod
    def single(cls, c1: float, r_minus: float, r_plus: float, lambda1: float,
               s_max: Optional[float] = None) -> "JunctionProblem":
        A = lambda1 - c1 * c1 / 4.0
        if s_max is None:
            s_max = math.ceil(1.2 * _bound(r_plus, [(c1, A)]) + 1.0)
        return cls((c1,), (r_minus, r_plus), (A,), s_max)

    @classmethod
    def from_dict(cls, data: dict) -> "JunctionProblem":
        try:
            junctions = list(data["junctions"])
            rates = list(data["segment_rates"] if "segment_rates" in data else data["rates"])
            if "flux_limiters" in data or "A" in data:
                limiters = list(data.get("flux_limiters", data.get("A")))
            else:
                limiters = [lam - c * c / 4.0 for c, lam in zip(junctions, data["lambda1"])]
            s_max = data.get("s_max")
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed junction problem: {exc}") from exc
        if s_max is None:
            s_max = math.ceil(1.2 * _bound(rates[-1], list(zip(junctions, limiters))) + 1.0)
        return cls(tuple(junctions), tuple(rates), tuple(limiters), float(s_max))

    def to_dict(self) -> dict:
        return {
            "junctions": list(self.junctions),
            "segment_rates": list(self.segment_rates),
            "flux_limiters": list(self.flux_limiters),
            "s_max": self.s_max,
        }

    @property
    def hamiltonian(self) -> Hamiltonian:
        return Hamiltonian(self.junctions, self.segment_rates)

    def min_s_max(self) -> float:
        return _bound(self.segment_rates[-1], list(zip(self.junctions, self.flux_limiters)))


def _bound(r_last: float, pairs) -> float:
    extra = max((math.sqrt(max(c * c / 4.0 + A, 0.0)) + c / 2.0 for c, A in pairs), default=0.0)
    return 2.0 * (math.sqrt(r_last) + extra)


def load_problem(path) -> JunctionProblem:
    return JunctionProblem.from_dict(json.loads(Path(path).read_text()))


@dataclass
class GridSolution:
    h: float
    s: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    iterations: int
    residual: float
    s_hat_numeric: float
    value_threshold: float
    converged: bool = True

    def obstacle_residual(self, problem: JunctionProblem) -> float:
        """max over interior nodes of |min(rho, rho + numerical flux)|."""
        return float(np.max(np.abs(_obstacle_terms(problem, self.s, self.values, self.h))))


@njit(cache=True)
def _root_backward(s, a, h, R):
    """Root of rho + H^+(s, (rho - a)/h) = 0."""
    if a + 0.5 * h * s + R - 0.25 * s * s >= 0.0:
        return 0.25 * s * s - R  # flat branch: slope at or below the minimiser s/2
    bb = s - h
    disc = bb * bb - 4.0 * (a + R)
    p = 0.5 * (bb + math.sqrt(max(disc, 0.0)))  # larger root: p > s/2
    return a + h * p


@njit(cache=True)
def _root_forward(s, b, h, R):
    """Root of rho + H^-(s, (b - rho)/h) = 0."""
    if b - 0.5 * h * s + R - 0.25 * s * s >= 0.0:
        return 0.25 * s * s - R
    bb = s + h
    disc = bb * bb - 4.0 * (b + R)
    q = 0.5 * (bb - math.sqrt(max(disc, 0.0)))  # smaller root: q < s/2
    return b - h * q


@njit(cache=True)
def _update(s, left, right, h, R_left, R_right, A):
    # both one-sided equations increase strictly in the unknown, so the root of
    # their maximum is the smaller root; a junction adds -A as a third candidate
    rho = min(_root_backward(s, left, h, R_left), _root_forward(s, right, h, R_right))
    if not math.isnan(A):
        rho = min(rho, -A)
    return rho if rho > 0.0 else 0.0


@njit(cache=True)
def _sweep_pair(s, rho, h, RL, RR, lim):
    n = len(s)
    change = 0.0
    for i in range(1, n - 2):
        new = _update(s[i], rho[i - 1], rho[i + 1], h, RL[i], RR[i], lim[i])
        d = abs(new - rho[i])
        if d > change:
            change = d
        rho[i] = new
    for i in range(n - 3, 0, -1):
        new = _update(s[i], rho[i - 1], rho[i + 1], h, RL[i], RR[i], lim[i])
        d = abs(new - rho[i])
        if d > change:
            change = d
        rho[i] = new
    return change


def node_update(s: float, left: float, right: float, h: float, R_left: float, R_right: float,
                A: Optional[float] = None) -> float:
    """New nodal value given both neighbours (``A`` only at a junction node).

    The obstacle clips the root of the flux equation at zero.
    """
    return float(_update(float(s), float(left), float(right), float(h), float(R_left),
                         float(R_right), math.nan if A is None else float(A)))


def _grid(problem: JunctionProblem, h: float):
    # the last node is the first grid point at or beyond s_max
    n = int(math.ceil(problem.s_max / h - 1e-9))
    s = h * np.arange(n + 1)
    junction_idx = []
    for c in problem.junctions:
        k = int(round(c / h))
        if abs(k * h - c) > 1e-9 * max(1.0, c):
            raise GridMisaligned(f"junction {c} is not on the grid of step {h}")
        junction_idx.append(k)
    return s, junction_idx


def _node_rates(problem: JunctionProblem, s: np.ndarray, junction_idx: list[int]):
    seg = np.searchsorted(np.asarray(problem.junctions), s, side="left")
    rates = np.asarray(problem.segment_rates)
    R_left = rates[seg].copy()
    R_right = rates[seg].copy()
    limiter = np.full(len(s), np.nan)
    for i, k in enumerate(junction_idx):
        R_left[k] = problem.segment_rates[i]
        R_right[k] = problem.segment_rates[i + 1]
        limiter[k] = problem.flux_limiters[i]
    return R_left, R_right, limiter


def solve(problem: JunctionProblem, h: Optional[float] = None, tol: float = 1e-10,
          max_sweeps: int = 100_000, init: str = "zero",
          value_threshold: Optional[float] = None) -> GridSolution:
    """Gauss-Seidel solve of the discrete obstacle problem.

    ``init`` is "zero" or "large"; the two starting points bracket the
    discrete solution from below and above. ``value_threshold`` sets which
    nodal values count as zero when locating the free boundary.
    """
    if h is None:
        h = 1e-3 * problem.s_max / 10.0
    s, junction_idx = _grid(problem, h)
    R_left, R_right, limiter = _node_rates(problem, s, junction_idx)
    n = len(s)
    r_last = problem.segment_rates[-1]

    if init == "zero":
        rho = np.zeros(n)
    elif init == "large":
        top = 0.25 * problem.s_max ** 2 + max(abs(a) for a in problem.flux_limiters + (1.0,))
        rho = top + 0.25 * s * s
    else:
        raise ConfigError(f"unknown init {init!r}")
    rho[0] = 0.0
    rho[-2:] = 0.25 * s[-2:] ** 2 - r_last

    change = math.inf
    sweeps = 0
    while sweeps < max_sweeps:
        change = float(_sweep_pair(s, rho, h, R_left, R_right, limiter))
        sweeps += 1
        if change < tol:
            break
    else:
        raise NoConvergence(sweeps, change)

    values = rho
    if value_threshold is None:
        value_threshold = 1e-9
    s_hat = _free_boundary(s, values, value_threshold)
    return GridSolution(h=h, s=s, values=values, iterations=sweeps, residual=change,
                        s_hat_numeric=s_hat, value_threshold=value_threshold)


def _free_boundary(s: np.ndarray, values: np.ndarray, threshold: float) -> float:
    """Last node at or below the threshold, refined by linear interpolation.

    The discrete solution leaves zero with a finite slope, so extending the
    first positive segment back to the threshold recovers the free boundary
    to within O(h) without the bias a large threshold would add.
    """
    below = np.nonzero(values <= threshold)[0]
    k = int(below[-1]) if len(below) else 0
    if k + 1 >= len(s):
        return float(s[k])
    v0, v1 = values[k], values[k + 1]
    if v1 - v0 <= 0:
        return float(s[k])
    frac = (threshold - v0) / (v1 - v0)
    return float(s[k] + max(0.0, min(1.0, frac)) * (s[k + 1] - s[k]))


def _obstacle_terms(problem: JunctionProblem, s: np.ndarray, values: np.ndarray, h: float) -> np.ndarray:
    _, junction_idx = _grid(problem, h)
    R_left, R_right, limiter = _node_rates(problem, s, junction_idx)
    out = []
    for i in range(1, len(s) - 2):
        dm = (values[i] - values[i - 1]) / h
        dp = (values[i + 1] - values[i]) / h
        x = s[i]
        qm = max(dm, x / 2.0)
        qp = min(dp, x / 2.0)
        flux = max(-x * qm + qm * qm + R_left[i], -x * qp + qp * qp + R_right[i])
        if not math.isnan(limiter[i]):
            flux = max(flux, limiter[i])
        out.append(min(values[i], values[i] + flux))
    return np.asarray(out)


def multi_junction_speed(problem: JunctionProblem, h: Optional[float] = None, tol: float = 1e-10,
                         max_sweeps: int = 100_000) -> float:
    """Free boundary of the discrete solution, i.e. the predicted spreading speed."""
    return solve(problem, h=h, tol=tol, max_sweeps=max_sweeps).s_hat_numeric
