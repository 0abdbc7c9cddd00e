import csv
import io
import json

import pytest

from smcflab.cli import main
from smcflab.config import BUILTIN_CONFIGS, load_config, parse_config, parse_spec
from smcflab.errors import ConfigError


def _run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


def test_parse_config_defaults_and_values():
    rc = parse_config("k = 2\nfamily = perturbed-graph  # comment\nspecs = thm32, yang:3/5\n")
    assert rc.flow.k == 2.0
    assert [s.name for s in rc.specs] == ["thm32", "yang0.6"]
    assert rc.surface.family == "perturbed-graph"


@pytest.mark.parametrize(
    "text",
    ["bogus = 1", "k = 1\nk = 2", "nu = many", "c_cfl = 0.9", "k = -1", "family = torus", "specs = thm99",
     "samples = 0", "just a line"],
)
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_builtin_configs_parse():
    for name in BUILTIN_CONFIGS:
        load_config(name)
    with pytest.raises(ConfigError):
        load_config("/nonexistent/file.cfg")


def test_parse_spec():
    assert parse_spec("thm51", 2.0).k == 2.0
    with pytest.raises(ConfigError):
        parse_spec("yang")


def test_verify_algebra_small():
    code, out = _run(["verify-algebra", "--samples", "200", "--seed", "3"])
    assert code == 0 and "all suites passed" in out


def test_verify_algebra_negative_control():
    code, out = _run(["verify-algebra", "--samples", "200", "--negative-control", "w_norm"])
    assert code == 1 and "violations in: w_norm" in out


def test_verify_algebra_usage_errors():
    assert _run(["verify-algebra", "--samples", "0"])[0] == 2
    assert _run(["verify-algebra", "--negative-control", "nope"])[0] == 2
    assert _run(["frobnicate"])[0] == 2


def test_thresholds_table_and_csv():
    code, out = _run(["thresholds"])
    assert code == 0 and "251/265" in out and "121/129" in out
    code, out = _run(["thresholds", "--csv", "--yang", "0.6"])
    rows = list(csv.DictReader(io.StringIO(out)))
    by_case = {r["case"]: r for r in rows}
    assert float(by_case["Yang_lam=3/5"]["stated_bound_float"]) == pytest.approx(0.8165, abs=1e-4)
    assert float(by_case["Thm51_Hnonzero"]["root"]) == pytest.approx(0.9466, abs=1e-4)
    assert _run(["thresholds", "--yang", "0.9"])[0] == 2


def test_flow_holomorphic_builtin_and_report(tmp_path, monkeypatch):
    cfg = tmp_path / "holo.cfg"
    cfg.write_text(BUILTIN_CONFIGS["holomorphic-graph"].replace("t_end = 0.2", "t_end = 0.02") + "plots = true\n")
    monkeypatch.setenv("SMCF_OUTPUT_DIR", str(tmp_path / "out"))
    code, out = _run(["flow", str(cfg)])
    assert code == 0, out
    series = tmp_path / "out" / "holo_series.csv"
    summary = json.loads((tmp_path / "out" / "holo_monitors.json").read_text())
    assert summary["trusted"] and summary["monitors"]["thm32"]["passed"]
    assert (tmp_path / "out" / "holo_max_sin2_half.svg").exists()

    code, out = _run(["report", str(series), "--output-dir", str(tmp_path / "rep")])
    assert code == 0
    c = summary["monitors"]["thm32"]["b_decay_3k"]["c"]
    assert f"{c:.6g}" in out
    first = (tmp_path / "rep" / "holo_max_H2.svg").read_bytes()
    _run(["report", str(series), "--output-dir", str(tmp_path / "rep")])
    assert (tmp_path / "rep" / "holo_max_H2.svg").read_bytes() == first


def test_flow_and_report_usage_errors(tmp_path):
    assert _run(["flow", str(tmp_path / "missing.cfg")])[0] == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert _run(["flow", str(bad)])[0] == 2
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert _run(["report", str(empty)])[0] == 2
    assert _run(["report", str(tmp_path / "none.csv")])[0] == 2
