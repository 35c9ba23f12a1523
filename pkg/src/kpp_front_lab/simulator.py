"""Direct simulation of u_t = u_xx + u (g_total(t, x) - u) with front tracking.

The state is stored as W = -log u. Far ahead of the front u drops below the
smallest double long before the rate function stops being informative, so
the log form is what makes -log u(t, s t) / t readable at large t. Both
substeps act on W directly:

* reaction: the logistic ODE with g frozen over the step is solved exactly;
* diffusion: the linear step for u is rescaled row by row by exp(V_i), with
  V a Lipschitz lower envelope of W, so the tridiagonal system only ever
  sees bounded ratios exp(V_i - V_j) of neighbours.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .errors import ConfigError, DomainExhausted, LevelNotReached, UnstableBlowup
from .profiles import Constant, EnvironmentProfile, cell_average

__all__ = [
    "Bump",
    "Shift",
    "SimConfig",
    "SimResult",
    "FrontTrace",
    "simulate",
    "multi_shift_simulate",
    "front_speed",
    "rate_function",
    "SCHEMES",
]

SCHEMES = ("imex_euler", "imex_crank_nicolson", "explicit_euler")
TAIL_SLOPE = 50.0  # decay rate of the initial datum outside its support, in W units
EXHAUSTION_LEVEL = 1e-6


@dataclass(frozen=True)
class Bump:
    """Plateau of the given height on [center - width/2, center + width/2]."""

    center: float = 0.0
    width: float = 2.0
    height: float = 1.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ConfigError("bump needs positive width and height")

    def log_density(self, x: np.ndarray) -> np.ndarray:
        dist = np.maximum(np.abs(x - self.center) - 0.5 * self.width, 0.0)
        return -math.log(self.height) + TAIL_SLOPE * dist


@dataclass(frozen=True)
class Shift:
    speed: float
    profile: EnvironmentProfile


@dataclass
class SimConfig:
    profile: EnvironmentProfile
    c1: float = 0.0
    t_end: float = 100.0
    dx: float = 0.05
    dt: float = 0.025
    x_min: Optional[float] = None
    x_max: Optional[float] = None
    scheme: str = "imex_euler"
    u0: Bump = field(default_factory=Bump)
    shifts: tuple[Shift, ...] = ()  # further shifting profiles, c1 < c2 < ...
    levels: tuple[float, ...] = ()
    record_dt: float = 1.0
    snapshot_times: tuple[float, ...] = ()

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not (self.dx > 0 and self.dt > 0 and self.t_end > 0):
            raise ConfigError("dx, dt and t_end must be positive")
        if self.scheme == "explicit_euler" and self.dt > 0.4 * self.dx ** 2:
            raise ConfigError(f"explicit Euler needs dt <= 0.4 dx^2 = {0.4 * self.dx ** 2:.4g}")
        if self.scheme == "imex_crank_nicolson" and self.dt > self.dx ** 2:
            raise ConfigError("Crank-Nicolson keeps u positive only for dt <= dx^2")
        if self.dt > self.dx and self.scheme != "explicit_euler":
            raise ConfigError("IMEX schemes need dt <= dx for reaction accuracy")
        speeds = [self.c1] + [s.speed for s in self.shifts]
        if any(b <= a for a, b in zip(speeds, speeds[1:])):
            raise ConfigError("shift speeds must be strictly increasing")
        chain = [self.profile] + [s.profile for s in self.shifts]
        for left, right in zip(chain, chain[1:]):
            if abs(left.r_plus - right.r_minus) > 1e-12:
                raise ConfigError("adjacent shifting profiles must share their asymptotic rate")
        if self.x_max is None:
            self.x_max = self.default_x_max()
        if self.x_min is None:
            self.x_min = min(-40.0, self.u0.center - 0.5 * self.u0.width - 20.0)
        lo, hi = self.u0.center - 0.5 * self.u0.width, self.u0.center + 0.5 * self.u0.width
        if not (self.x_min < lo and hi < self.x_max):
            raise ConfigError("initial bump must lie inside the domain")
        if not self.levels:
            self.levels = (0.5 * self.inf_g, EXHAUSTION_LEVEL)
        elif EXHAUSTION_LEVEL not in self.levels:
            self.levels = tuple(self.levels) + (EXHAUSTION_LEVEL,)

    @property
    def chain(self) -> list[tuple[float, EnvironmentProfile]]:
        return [(self.c1, self.profile)] + [(s.speed, s.profile) for s in self.shifts]

    @property
    def inf_g(self) -> float:
        return min(p.inf_g for _, p in self.chain)

    @property
    def sup_g(self) -> float:
        # the glued profiles overlap only where one of them sits at its asymptote
        return max(p.sup_g for _, p in self.chain)

    def speed_bound(self) -> float:
        """Upper bound for any level-set speed: the environment never outruns this."""
        fastest = max(c for c, _ in self.chain)
        return max(2.0 * math.sqrt(self.sup_g), fastest)

    def default_x_max(self) -> float:
        return (self.speed_bound() + 0.25) * self.t_end + self.u0.center + self.u0.width + 20.0

    def g_total(self, t: float, x: np.ndarray) -> np.ndarray:
        """Cell-averaged growth rate: g1(x - c1 t) + sum_i (g_i(x - c_i t) - g_i(-inf))."""
        out = cell_average(self.profile, x - self.c1 * t, self.dx)
        for s in self.shifts:
            out = out + cell_average(s.profile, x - s.speed * t, self.dx) - s.profile.r_minus
        return out


@dataclass
class FrontTrace:
    level: float
    samples: np.ndarray  # columns t, x_level(t)
    fitted_speed: float
    fit_window: tuple[float, float]
    fit_residual: float


@dataclass
class SimResult:
    config: SimConfig
    x: np.ndarray = field(repr=False)
    times: np.ndarray = field(repr=False)
    fronts: dict[float, np.ndarray] = field(repr=False)
    u_max: np.ndarray = field(repr=False)
    u_min: float
    snapshots: dict[float, np.ndarray] = field(repr=False)
    final_log: np.ndarray = field(repr=False)

    def log_density(self, t: float) -> np.ndarray:
        if abs(t - self.times[-1]) < 1e-9 and t not in self.snapshots:
            return self.final_log
        for ts, W in self.snapshots.items():
            if abs(ts - t) < 1e-9:
                return W
        raise ConfigError(f"no snapshot stored at t = {t}")

    def density(self, t: float) -> np.ndarray:
        return np.exp(-self.log_density(t))


def _rightmost(x: np.ndarray, W: np.ndarray, level_log: float) -> float:
    """Rightmost x with W <= level_log (u >= level), linearly interpolated in W."""
    idx = np.nonzero(W <= level_log)[0]
    if len(idx) == 0:
        return math.nan
    k = int(idx[-1])
    if k + 1 >= len(x):
        return float(x[k])
    w0, w1 = W[k], W[k + 1]
    frac = (level_log - w0) / (w1 - w0) if w1 > w0 else 0.0
    return float(x[k] + frac * (x[k + 1] - x[k]))


def _react(W: np.ndarray, g: np.ndarray, dt: float) -> np.ndarray:
    # u' = u (g - u) with g frozen: u(dt) = u e^{g dt} / (1 + u (e^{g dt} - 1) / g)
    growth = np.expm1(g * dt) / g
    return W - g * dt + np.log1p(np.exp(-W) * growth)


def _ratios(W: np.ndarray):
    left = np.empty_like(W)
    right = np.empty_like(W)
    left[1:] = np.exp(np.minimum(W[1:] - W[:-1], 700.0))
    right[:-1] = np.exp(np.minimum(W[:-1] - W[1:], 700.0))
    left[0] = right[-1] = 0.0  # Dirichlet zero beyond both ends
    return left, right


def _diffuse(W: np.ndarray, r: float, scheme: str) -> np.ndarray:
    left, right = _ratios(W)
    if scheme == "explicit_euler":
        v = 1.0 - 2.0 * r + r * (left + right)
        return W - np.log(v)
    theta = 1.0 if scheme == "imex_euler" else 0.5
    rhs = np.ones_like(W)
    if theta < 1.0:
        rhs = rhs - 2.0 * (1.0 - theta) * r + (1.0 - theta) * r * (left + right)
    a = theta * r
    # Rescale by a lower envelope of W whose slope matches the decay of the
    # implicit kernel; scaling by W itself overflows wherever the data decay
    # faster than one implicit step can reproduce.
    q = ((1.0 + 2.0 * a) - math.sqrt(1.0 + 4.0 * a)) / (2.0 * a)
    ref = _envelope(W, -math.log(q))
    left_r, right_r = _ratios(ref)
    v = _thomas(a, left_r, right_r, rhs * np.exp(ref - W))
    return ref - np.log(v)


@njit(cache=True)
def _envelope(W, step):
    """Largest sequence below W that changes by at most ``step`` per cell."""
    out = W.copy()
    for i in range(1, len(out)):
        out[i] = min(out[i], out[i - 1] + step)
    for i in range(len(out) - 2, -1, -1):
        out[i] = min(out[i], out[i + 1] + step)
    return out


@njit(cache=True)
def _thomas(a, left, right, rhs):
    """Solve (1 + 2a) v_i - a left_i v_{i-1} - a right_i v_{i+1} = rhs_i.

    The system is exp(W) (I - a L) exp(-W), a diagonal similarity of an
    M-matrix, so elimination without pivoting is stable: in every pivot the
    product left_i * right_{i-1} collapses back to 1.
    """
    n = len(rhs)
    cp = np.empty(n)
    dp = np.empty(n)
    diag = 1.0 + 2.0 * a
    cp[0] = -a * right[0] / diag
    dp[0] = rhs[0] / diag
    for i in range(1, n):
        low = -a * left[i]
        denom = diag - low * cp[i - 1]
        cp[i] = -a * right[i] / denom
        dp[i] = (rhs[i] - low * dp[i - 1]) / denom
    v = np.empty(n)
    v[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        v[i] = dp[i] - cp[i] * v[i + 1]
    return v


def simulate(config: SimConfig) -> SimResult:
    """Run the simulation; the returned handle holds fronts, u_max and snapshots."""
    n_steps = max(1, int(math.ceil(config.t_end / config.dt - 1e-9)))
    dt = config.t_end / n_steps
    nx = int(round((config.x_max - config.x_min) / config.dx)) + 1
    x = config.x_min + config.dx * np.arange(nx)
    r = dt / config.dx ** 2

    W = config.u0.log_density(x)
    bound = 10.0 * max(config.sup_g, config.u0.height)
    levels = tuple(config.levels)
    level_logs = [-math.log(lv) for lv in levels]
    record_every = max(1, int(round(config.record_dt / dt)))
    snap_steps = {int(round(ts / dt)): ts for ts in config.snapshot_times}
    guard = config.x_max - 10.0 * config.dx

    times, u_max = [], []
    fronts: dict[float, list[float]] = {lv: [] for lv in levels}
    snapshots: dict[float, np.ndarray] = {}
    u_min = math.inf
    for step in range(1, n_steps + 1):
        t_mid = (step - 0.5) * dt
        W = _react(W, config.g_total(t_mid, x), dt)
        W = _diffuse(W, r, config.scheme)
        if step % record_every == 0 or step == n_steps:
            w_min = float(np.min(W))
            top = math.exp(-w_min)
            if not math.isfinite(top) or top > bound:
                raise UnstableBlowup(f"max u = {top:.3g} exceeds {bound:.3g} at t = {step * dt:.4g}")
            u_min = min(u_min, float(np.exp(-np.max(W))))
            times.append(step * dt)
            u_max.append(top)
            for lv, ll in zip(levels, level_logs):
                fronts[lv].append(_rightmost(x, W, ll))
            edge = fronts[EXHAUSTION_LEVEL][-1]
            if edge >= guard:
                raise DomainExhausted(f"level {EXHAUSTION_LEVEL:g} reached x = {edge:.4g} "
                                      f"near x_max = {config.x_max:.4g} at t = {step * dt:.4g}")
        if step in snap_steps:
            snapshots[snap_steps[step]] = W.copy()

    return SimResult(config=config, x=x, times=np.asarray(times),
                     fronts={lv: np.asarray(v) for lv, v in fronts.items()},
                     u_max=np.asarray(u_max), u_min=u_min, snapshots=snapshots, final_log=W)


def multi_shift_simulate(config: SimConfig) -> SimResult:
    """Simulation with several rigidly shifting profiles; requires config.shifts."""
    if not config.shifts:
        raise ConfigError("multi_shift_simulate needs at least one further shift")
    return simulate(config)


def front_speed(handle: SimResult, level: Optional[float] = None,
                window: Optional[tuple[float, float]] = None) -> FrontTrace:
    """Least-squares speed of the level set x_level(t) over [t_end/2, t_end]."""
    if level is None:
        level = handle.config.levels[0]
    match = [lv for lv in handle.fronts if abs(lv - level) <= 1e-12 * max(1.0, level)]
    if not match:
        raise ConfigError(f"level {level} was not tracked; tracked: {sorted(handle.fronts)}")
    xs = handle.fronts[match[0]]
    t = handle.times
    if np.all(np.isnan(xs)):
        raise LevelNotReached(f"u never reached level {level}")
    t_end = handle.config.t_end
    lo, hi = window if window is not None else (0.5 * t_end, t_end)
    m = (t >= lo - 1e-9) & (t <= hi + 1e-9) & np.isfinite(xs)
    if m.sum() < 2:
        raise LevelNotReached(f"level {level} not attained inside the fit window")
    coef, res, *_ = np.polyfit(t[m], xs[m], 1, full=True)
    resid = float(math.sqrt(res[0] / m.sum())) if len(res) else 0.0
    return FrontTrace(level=level, samples=np.column_stack([t, xs]), fitted_speed=float(coef[0]),
                      fit_window=(lo, hi), fit_residual=resid)


def rate_function(handle: SimResult, t: float, s: Optional[Sequence[float]] = None):
    """Empirical rate function w(s) = -log u(t, s t) / t on the given s values."""
    W = handle.log_density(t)
    if s is None:
        s_top = min(handle.x[-1] / t, 2.0 * handle.config.speed_bound())
        s = np.linspace(0.0, s_top, 401)
    s = np.asarray(s, dtype=float)
    pos = s * t
    if np.any(pos < handle.x[0]) or np.any(pos > handle.x[-1]):
        raise ConfigError("requested s values leave the simulated domain")
    return s, np.interp(pos, handle.x, W) / t


def homogeneous_config(g0: float = 1.0, **kw) -> SimConfig:
    return SimConfig(profile=Constant(g0), **kw)
