"""Cross-validation reports, sweeps and deterministic CSV/JSON output."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from . import __version__
from .explicit import construct_explicit, verify_viscosity
from .junction import JunctionProblem, solve
from .speeds import Regime, SpeedInputs, rightward_speed

__all__ = [
    "CANONICAL_POINTS",
    "FIGURE1_PRESETS",
    "CrossValidationRow",
    "CrossValidationReport",
    "config_hash",
    "write_csv",
    "write_json",
    "worker_count",
    "ordered_map",
    "figure1_sweep",
    "cross_validate",
]

# r_minus = r_plus = 1, Lambda_1 = 2: one point in each of the four regimes
CANONICAL_POINTS = (
    SpeedInputs(1.0, 1.0, 1.0, 2.0),
    SpeedInputs(2.5, 1.0, 1.0, 2.0),
    SpeedInputs(3.0, 1.0, 1.0, 2.0),
    SpeedInputs(5.0, 1.0, 1.0, 2.0),
)

# panel -> (r_minus, r_plus, lambda1)
FIGURE1_PRESETS = {
    "a": (1.0, 2.0, 2.0),
    "b": (1.0, 1.5, 3.0),
    "c": (2.0, 1.0, 2.0),
    "d": (1.5, 1.0, 3.0),
    "e": (1.0, 1.0, 1.0),
    "f": (1.0, 1.0, 2.0),
}

EMPIRICAL_RTOL = 0.07


def config_hash(config) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _provenance(config) -> str:
    return f"# kpp_front_lab {__version__} config={config_hash(config)}\n"


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], config=None) -> None:
    """Write header + rows behind a '#' provenance line, atomically."""
    buf = io.StringIO()
    buf.write(_provenance(config if config is not None else {}))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    _atomic_write(path, buf.getvalue())


def write_json(path, payload: dict, config=None) -> None:
    body = dict(payload)
    body["_provenance"] = {"version": __version__, "config": config_hash(config or {})}
    _atomic_write(path, json.dumps(body, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, float) and not math.isfinite(o):
        return None
    if hasattr(o, "tolist"):
        return o.tolist()
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"not serialisable: {type(o).__name__}")


def worker_count() -> int:
    env = os.environ.get("KPP_FRONT_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def ordered_map(fn: Callable, items: Sequence, workers: Optional[int] = None) -> list:
    """Apply fn to every item on a thread pool; results keep the input order."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def figure1_sweep(panel: str, points: int = 400) -> list[tuple[float, float, str]]:
    """(c1, c_star, regime) rows for one panel of the speed-vs-c1 figure."""
    if panel not in FIGURE1_PRESETS:
        raise ValueError(f"unknown panel {panel!r}; expected one of {sorted(FIGURE1_PRESETS)}")
    rm, rp, lam = FIGURE1_PRESETS[panel]
    top = 2.0 * (math.sqrt(rm) + math.sqrt(lam - rm)) + 2.0
    cs = [top * k / (points - 1) for k in range(points)]

    def row(c):
        res = rightward_speed(SpeedInputs(c, rm, rp, lam))
        return (c, res.c_star, res.regime.value)

    return ordered_map(row, cs)


@dataclass
class CrossValidationRow:
    inputs: SpeedInputs
    c_formula: float
    s_hat_explicit: float
    regime: Regime
    residual_ok: bool
    s_hat_numeric: float = math.nan
    h: float = math.nan
    c_empirical: float = math.nan

    @property
    def deviations(self) -> dict[str, float]:
        out = {"formula_vs_explicit": abs(self.c_formula - self.s_hat_explicit)}
        if math.isfinite(self.s_hat_numeric):
            out["formula_vs_numeric"] = abs(self.c_formula - self.s_hat_numeric)
        if math.isfinite(self.c_empirical):
            out["formula_vs_empirical"] = abs(self.c_formula - self.c_empirical) / self.c_formula
        return out

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values())

    @property
    def passed(self) -> bool:
        d = self.deviations
        ok = self.c_formula == self.s_hat_explicit and self.residual_ok
        if "formula_vs_numeric" in d:
            ok = ok and d["formula_vs_numeric"] <= 10.0 * self.h
        if "formula_vs_empirical" in d:
            ok = ok and d["formula_vs_empirical"] <= EMPIRICAL_RTOL
        return ok

    def as_row(self) -> list:
        i = self.inputs
        return [i.c1, i.r_minus, i.r_plus, i.lambda1, self.c_formula, self.s_hat_explicit,
                self.s_hat_numeric, self.c_empirical, self.regime.value, self.max_deviation,
                int(self.passed)]


REPORT_HEADER = ["c1", "r_minus", "r_plus", "lambda1", "c_formula", "s_hat_explicit",
                 "s_hat_numeric", "c_empirical", "regime", "max_deviation", "pass"]


@dataclass
class CrossValidationReport:
    rows: list[CrossValidationRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(r.passed for r in self.rows)

    def table(self) -> list[list]:
        return [r.as_row() for r in self.rows]

    def summary(self) -> str:
        lines = []
        for r in self.rows:
            i = r.inputs
            lines.append(f"{'PASS' if r.passed else 'FAIL'} c1={i.c1:g} r-={i.r_minus:g} r+={i.r_plus:g} "
                         f"lambda1={i.lambda1:g} regime={r.regime.value} c*={r.c_formula:.6g} "
                         f"max_dev={r.max_deviation:.3g}")
        return "\n".join(lines)


def _empirical_speed(inp: SpeedInputs, t_end: float, dx: float, dt: float) -> float:
    # imported lazily: only the pde tier needs the simulator and eigensolver
    from .eigen import calibrate_patch_length
    from .profiles import ThreePatch
    from .simulator import SimConfig, front_speed, simulate

    if inp.r_minus != inp.r_plus:
        raise ValueError("empirical check realises Lambda_1 with a symmetric three-patch profile")
    r = inp.r_minus
    mid = max(3.0, inp.lambda1 + 1.0)
    L = calibrate_patch_length(r, mid, r, inp.lambda1)
    cfg = SimConfig(ThreePatch(r, mid, r, L), c1=inp.c1, t_end=t_end, dx=dx, dt=dt)
    return front_speed(simulate(cfg)).fitted_speed


def cross_validate(points: Sequence[SpeedInputs] = CANONICAL_POINTS, numeric_h: Optional[float] = None,
                   empirical: bool = False, t_end: float = 400.0, dx: float = 0.05, dt: float = 0.025,
                   workers: Optional[int] = None) -> CrossValidationReport:
    """Formula vs explicit construction, optionally vs grid solver and PDE."""

    def one(inp: SpeedInputs) -> CrossValidationRow:
        res = rightward_speed(inp)
        sol = construct_explicit(inp)
        row = CrossValidationRow(inp, res.c_star, sol.s_hat, res.regime, verify_viscosity(sol).passed)
        if numeric_h is not None:
            prob = JunctionProblem.single(inp.c1, inp.r_minus, inp.r_plus, inp.lambda1)
            row.s_hat_numeric = solve(prob, h=numeric_h, init="large").s_hat_numeric
            row.h = numeric_h
        if empirical:
            row.c_empirical = _empirical_speed(inp, t_end, dx, dt)
        return row

    return CrossValidationReport(ordered_map(one, list(points), workers))
