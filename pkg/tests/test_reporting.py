import json
import os

import pytest

from kpp_front_lab.reporting import (
    CANONICAL_POINTS,
    FIGURE1_PRESETS,
    config_hash,
    cross_validate,
    figure1_sweep,
    ordered_map,
    worker_count,
    write_csv,
    write_json,
)
from kpp_front_lab.speeds import Regime


def test_cross_validate_quick():
    rep = cross_validate()
    assert rep.passed
    assert [r.regime for r in rep.rows] == [Regime.KPP_RIGHT, Regime.KEEP_PACE,
                                            Regime.NONLOCAL_PULLING, Regime.KPP_LEFT]
    assert [r.c_formula for r in rep.rows] == [2.0, 2.5, 2.5, 2.0]
    assert rep.summary().count("PASS") == 4


def test_cross_validate_with_grid_solver():
    rep = cross_validate(numeric_h=0.01)
    assert rep.passed
    assert all(r.deviations["formula_vs_numeric"] <= 0.1 for r in rep.rows)


@pytest.mark.parametrize("panel", sorted(FIGURE1_PRESETS))
def test_figure1_panels(panel):
    rows = figure1_sweep(panel, points=120)
    assert len(rows) == 120
    cs = [r[0] for r in rows]
    assert cs == sorted(cs) and cs[0] == 0.0
    rm, rp, lam = FIGURE1_PRESETS[panel]
    speeds = [r[1] for r in rows]
    assert min(speeds) >= 2 * min(rm, rp) ** 0.5 - 1e-12
    if lam > max(rm, rp):
        assert {r[2] for r in rows} >= {"keep_pace", "nonlocal_pulling"}


def test_figure1_unknown_panel():
    with pytest.raises(ValueError):
        figure1_sweep("z")


def test_config_hash_is_order_independent():
    assert config_hash({"a": 1, "b": 2}) == config_hash({"b": 2, "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_csv_provenance_and_atomicity(tmp_path):
    path = tmp_path / "sub" / "out.csv"
    write_csv(path, ["x", "y"], [(0.1, 2), (0.2, 3)], {"k": 1})
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# kpp_front_lab ") and config_hash({"k": 1}) in lines[0]
    assert lines[1:] == ["x,y", "0.1,2", "0.2,3"]
    assert [p.name for p in path.parent.iterdir()] == ["out.csv"]


def test_failed_write_leaves_old_file(tmp_path):
    path = tmp_path / "out.csv"
    write_csv(path, ["x"], [(1,)])
    before = path.read_text()

    def rows():
        yield (2,)
        raise RuntimeError("boom")

    with pytest.raises(RuntimeError):
        write_csv(path, ["x"], rows())
    assert path.read_text() == before
    assert len(list(tmp_path.iterdir())) == 1


def test_json_output(tmp_path):
    path = tmp_path / "o.json"
    write_json(path, {"v": float("inf"), "r": Regime.KEEP_PACE}, {"k": 1})
    body = json.loads(path.read_text())
    assert body["r"] == "keep_pace" and body["_provenance"]["config"] == config_hash({"k": 1})


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("KPP_FRONT_LAB_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("KPP_FRONT_LAB_THREADS", "junk")
    assert worker_count() == max(1, os.cpu_count() or 1)


def test_ordered_map_keeps_order():
    items = list(range(50))
    assert ordered_map(lambda v: v * v, items, workers=4) == [v * v for v in items]


def test_canonical_points_cover_all_regimes():
    from kpp_front_lab.speeds import rightward_speed

    assert {rightward_speed(p).regime for p in CANONICAL_POINTS} == set(Regime)
