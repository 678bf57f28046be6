import json
import math
import subprocess
import sys

import numpy as np
import pytest

from probe_engine.errors import ConfigError, DomainError
from probe_engine.harness import cli
from probe_engine.harness.checks import run_checks
from probe_engine.harness.config import (
    WORKERS_ENV,
    default_config,
    from_mapping,
    load_config,
    merge,
    parse_assignment,
)
from probe_engine.harness.datasets import Column, Dataset, build_timestamp, dumps, loads, read, write
from probe_engine.harness.figures import normalize_id, run_figure
from probe_engine.harness.sweep import run_sweep

SMALL = [
    {"grids": {"phi": {"start": 0.3, "stop": 5.9, "count": 4}, "delta": {"start": 0.5, "stop": 1.8, "count": 5}}}
]


def small(**extra):
    return load_config(None, SMALL + [extra] if extra else SMALL)


def problems(data):
    with pytest.raises(ConfigError) as info:
        from_mapping(data)
    return dict(info.value.problems)


# ----------------------------------------------------------------- configuration


def test_default_grids():
    cfg = default_config()
    assert cfg.grids.phi.count == 80 and cfg.grids.delta.count == 80
    assert cfg.grids.y_values == (0.5, 1.0, 2.0, 5.0, 10.0, 50.0)
    assert cfg.workers == 1


def test_assignment_parsing():
    assert parse_assignment("grids.phi.count=20") == {"grids": {"phi": {"count": 20}}}
    assert parse_assignment("sweep.regimes=[L, LP]") == {"sweep": {"regimes": ["L", "LP"]}}
    with pytest.raises(ConfigError):
        parse_assignment("no-equals-sign")


def test_merge_is_recursive():
    base = {"a": {"b": 1, "c": 2}, "d": 3}
    assert merge(base, {"a": {"c": 5}}) == {"a": {"b": 1, "c": 5}, "d": 3}
    assert base["a"]["c"] == 2


@pytest.mark.parametrize(
    "data,field",
    [
        ({"grids": {"phi": {"start": 0, "stop": 1, "count": 1}}}, "grids.phi.count"),
        ({"grids": {"phi": {"start": 1, "stop": 1, "count": 5}}}, "grids.phi"),
        ({"grids": {"power_gain": {"start": -2, "stop": 0, "count": 5}}}, "grids.power_gain"),
        ({"grids": {"epsilon": {"start": 0, "stop": 1, "count": 5}}}, "grids.epsilon"),
        ({"grids": {"delta": {"start": -1, "stop": 1, "count": 3}}}, "grids.delta"),
        ({"grids": {"force_scales": [0.0]}}, "grids.force_scales"),
        ({"sweep": {"regimes": ["L", "XX"]}}, "sweep.regimes"),
        ({"sweep": {"branch": "sideways"}}, "sweep.branch"),
        ({"output": {"format": "xml"}}, "output.format"),
        ({"workers": 0}, "workers"),
        ({"colour": "blue"}, "colour"),
        ({"model": {"spin": 1}}, "model.spin"),
    ],
)
def test_config_rejects_with_field_path(data, field):
    assert field in problems(data)


def test_config_reports_every_problem():
    found = problems({"workers": -1, "grids": {"x": {"start": 0, "stop": 1, "count": 0}}, "output": {"format": 1}})
    assert {"workers", "grids.x.count", "output.format"} <= set(found)


def test_yaml_file_and_overrides(tmp_path):
    path = tmp_path / "sweep.yaml"
    path.write_text("grids:\n  phi: {start: 0.1, stop: 3.0, count: 7}\nworkers: 2\n")
    cfg = load_config(str(path), [parse_assignment("grids.phi.count=9")])
    assert cfg.grids.phi.count == 9 and cfg.grids.phi.start == 0.1 and cfg.workers == 2


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.yaml"))


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert load_config().workers == 3
    assert load_config(None, [{"workers": 1}]).workers == 1
    monkeypatch.setenv(WORKERS_ENV, "many")
    with pytest.raises(ConfigError):
        load_config()


def test_fingerprint_ignores_output_and_workers():
    a = default_config()
    b = load_config(None, [{"workers": 4, "output": {"format": "json", "path": "x.json"}}])
    c = load_config(None, [{"grids": {"phi": {"count": 10}}}])
    assert a.fingerprint() == b.fingerprint() != c.fingerprint()


# ----------------------------------------------------------------- datasets


def sample_dataset():
    cols = [Column("name", "-", "str"), Column("x", "1"), Column("n", "-", "int"), Column("flags", "-", "str")]
    ds = Dataset("TEST", cols, metadata={"title": "t", "note": [1, 2.5]})
    ds.add(name="a,b", x=0.1 + 0.2, n=3)
    ds.add(name="", x=None, n=None, flags="gap")
    ds.add(name="c", x=-1e-300, n=0, flags="")
    return ds


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_dataset_round_trip_is_bit_identical(fmt):
    ds = sample_dataset()
    text = dumps(ds, fmt)
    back = loads(text, fmt)
    assert back.rows == ds.rows
    assert back.metadata == ds.metadata
    assert dumps(back, fmt) == text


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_figure_round_trip(fmt, tmp_path):
    ds = run_figure("fig3", default_config())
    path = tmp_path / f"fig3.{fmt}"
    write(ds, path)
    back = read(path)
    assert back.rows == ds.rows
    assert dumps(back, fmt) == dumps(ds, fmt)


def test_unflagged_missing_value_rejected():
    ds = Dataset("T", [Column("x", "1")])
    ds.add(x=None)
    with pytest.raises(ValueError):
        ds.validate()


def test_timestamp_modes(monkeypatch):
    monkeypatch.delenv("SOURCE_DATE_EPOCH", raising=False)
    assert build_timestamp() is None
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    assert build_timestamp() == "1970-01-01T00:00:00Z"
    assert build_timestamp("now") is not None


# ----------------------------------------------------------------- figures


def test_figure_ids():
    assert normalize_id("fig4") == "FIG4"
    with pytest.raises(DomainError):
        normalize_id("fig7")


def test_fig2_gaps_at_pole():
    ds = run_figure("fig2", default_config())
    gaps = [r for r in ds.records() if r["gap"]]
    assert gaps and all(r["h"] is None and abs(r["x_m"] - 1) < 0.03 for r in gaps)
    assert {iv["kind"] for iv in ds.metadata["excluded_intervals"]} == {"pole"}
    ref = [r for r in ds.records() if r["series"] == "H_m" and r["d_m"] == 1.0]
    assert [r["h"] for r in ref] == [r["h"] for r in ds.records() if r["series"] == "H"]


def test_fig3_unit_d_equals_buttiker():
    rec = run_figure("fig3", default_config()).records()
    for y in default_config().grids.y_values:
        vp = [r["eta_ratio"] for r in rec if r["series"] == "voltage_probe" and r["d_m"] == 1.0 and r["y_m"] == y]
        bt = [r["eta_ratio"] for r in rec if r["series"] == "buttiker" and r["y_m"] == y]
        assert vp == bt and len(vp) == 100


def test_fig3_sign_change_becomes_gap():
    cfg = load_config(None, [{"grids": {"d_values": [-1.0], "y_values": [4.0]}}])
    ds = run_figure("fig3", cfg)
    assert any(iv["kind"] == "sign-change" for iv in ds.metadata["excluded_intervals"])
    assert all(r["eta_ratio"] is None for r in ds.records() if r["gap"])


def test_fig4_branch_option():
    cfg = load_config(None, [{"sweep": {"branch": "minus"}}])
    rec = run_figure("fig4", cfg).records()
    assert {r["branch"] for r in rec} == {"minus"}
    assert all(r["epsilon"] <= 1 for r in rec if r["epsilon"] is not None)


def test_fig5_curzon_ahlborn_point():
    ds = run_figure("fig5", default_config())
    hit = [r for r in ds.records() if r["x_m"] == 1.0 and r["power_gain"] == 0.0]
    assert hit and all(r["eta_ratio"] == 0.5 and r["above_ca"] == 1 for r in hit)
    assert ds.metadata["ca_contour"]


def test_fig6_sign_pattern_small_grid():
    ds = run_figure("fig6", small())
    assert ds.metadata["sign_pattern_holds"] is True
    assert len(ds.rows) == 20


# ----------------------------------------------------------------- sweep


def test_sweep_rows_and_order():
    cfg = small()
    ds = run_sweep(cfg)
    assert len(ds.rows) == 20 and ds.metadata["non_finite"] == 0
    keys = [(r["phi"], r["delta"]) for r in ds.records()]
    assert keys == sorted(keys)
    assert all(r["error"] == "" for r in ds.records())


def test_sweep_independent_of_worker_count():
    a = dumps(run_sweep(small(workers=1)))
    b = dumps(run_sweep(small(workers=2)))
    assert a == b


def test_zero_flux_sweep_sits_on_pole():
    cfg = small()
    rec = run_sweep(cfg, phis=[0.0]).records()
    engines = [r for r in rec if r["x_m"] is not None]
    assert engines
    assert all(abs(r["x_m"] - 1) < 1e-9 and "pole" in r["flags"] for r in engines)


def test_sweep_regime_filter():
    rec = run_sweep(small(sweep={"regimes": ["LP"]})).records()
    assert rec and {r["regime"] for r in rec} == {"LP"}


# ----------------------------------------------------------------- checks and CLI


def test_check_suite_passes():
    results = run_checks(default_config(), math.pi / 3, 1.5)
    assert results and all(r.passed for r in results), [r.line() for r in results if not r.passed]


def test_cli_figure_to_file(tmp_path):
    out = tmp_path / "fig5.json"
    assert cli.main(["figure", "fig5", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["metadata"]["figure"] == "FIG5"


def test_cli_sweep_csv(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    args = ["sweep", "--set", "grids.phi.count=2", "--set", "grids.delta.count=3", "--out", str(out)]
    assert cli.main(args) == 0
    ds = read(out)
    assert len(ds.rows) == 6


def test_cli_timestamp_now(capsys):
    assert cli.main(["figure", "fig2", "--timestamp", "now", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["metadata"]["timestamp"] is not None


def test_cli_onsager_dump(capsys):
    assert cli.main(["onsager-dump", "--phi", "0.5", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    l4 = np.array(doc["L4"]["values"])
    assert l4.shape == (4, 4) and doc["L3"]["kind"] == "VPROBE3"
    assert cli.main(["onsager-dump"]) == 0
    assert "L2 (BUTTIKER2)" in capsys.readouterr().out


def test_cli_check(capsys):
    assert cli.main(["check"]) == 0
    assert "FAIL" not in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        ["figure", "fig9"],
        ["figure", "fig5", "--set", "grids.x.count=1"],
        ["sweep", "--set", "sweep.regimes=[Q]"],
        ["figure", "fig2", "--config", "/nonexistent/config.yaml"],
        ["figure", "fig2", "--workers", "zero"],
    ],
)
def test_cli_configuration_errors(argv):
    with pytest.raises(SystemExit) as info:
        code = cli.main(argv)
        raise SystemExit(code)
    assert info.value.code == 1


def test_cli_numerical_failure(capsys):
    assert cli.main(["onsager-dump", "--tolerance", "1e-300"]) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "probe_engine.harness.cli", "figure", "fig5", "--set", "grids.x.count=5",
         "--set", "grids.power_gain.count=3"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith('# figure: "FIG5"')
