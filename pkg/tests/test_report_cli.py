import csv
import io
import json

import jsonschema
import pytest
import yaml

from vresidue import __version__
from vresidue.cache import ResultCache
from vresidue.cli import main
from vresidue.config import FORMAT, load_scenario, parse_scenario
from vresidue.report import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG,
    EXIT_METHOD,
    EXIT_OK,
    SweepError,
    run,
    sweep,
    sweep_csv,
    validate_report,
    write_report,
)


def strip_timing(path):
    body = json.loads(path.read_text())
    body.pop("timing")
    return body


def write(tmp_path, doc, name="s.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(doc))
    return p


def test_run_cauchy_all_methods(tmp_path):
    report = run(load_scenario("cauchy"), ResultCache(__version__, root=tmp_path))
    validate_report(report)
    assert report["exit_code"] == EXIT_OK
    methods = {r["method"] for r in report["rows"]}
    assert methods == {"contour", "boundary", "mq", "oracle"}
    for r in report["rows"]:
        assert abs(complex(*r["value"]) - 1) < 1e-6


def test_report_schema_rejects_extra_keys(tmp_path):
    report = run(load_scenario("cauchy"), ResultCache(__version__, enabled=False))
    report["unexpected"] = 1
    with pytest.raises(jsonschema.ValidationError):
        validate_report(report)


def test_failing_cross_check_exit_code(tmp_path):
    # the boundary circle also encloses the undeclared zero at 0.3, so it disagrees with the oracle
    doc = {"format": FORMAT, "kind": "affine", "section": ["z1*(z1 - 0.3)"], "weight": 1, "zeros": [[0]],
           "methods": ["boundary", "oracle"], "boundary": {"radius": 0.5}}
    p = write(tmp_path, doc)
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == EXIT_CHECK_FAILED
    body = json.loads((tmp_path / "o" / "report.json").read_text())
    assert not body["passed"]
    assert [v["passed"] for v in body["verdicts"]] == [False]


def test_method_error_keeps_partial_report(tmp_path):
    out = tmp_path / "out"
    code = main(["run", "growth-violation", "--out", str(out)])
    assert code == EXIT_METHOD
    body = json.loads((out / "report.json").read_text())
    status = {r["method"]: r["status"] for r in body["rows"]}
    assert status == {"contour": "ok", "mq": "error"}
    assert "growth" in next(r["message"] for r in body["rows"] if r["method"] == "mq")


def test_invalid_scenario_exit_code(tmp_path, capsys):
    p = write(tmp_path, {"format": "nope", "kind": "affine"})
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_reports_are_deterministic_apart_from_timing(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "monomial-2-3", "--out", str(a), "--no-cache"]) == EXIT_OK
    assert main(["run", "monomial-2-3", "--out", str(b), "--no-cache"]) == EXIT_OK
    assert strip_timing(a / "report.json") == strip_timing(b / "report.json")
    assert (a / "traces.csv").read_text() == (b / "traces.csv").read_text()


def test_second_run_hits_cache(tmp_path):
    cache = ResultCache(__version__, root=tmp_path / "c")
    first = run(load_scenario("lg-cubic-z1"), cache)
    evaluated = cache.misses
    assert cache.hits == 0 and evaluated > 0
    second = run(load_scenario("lg-cubic-z1"), cache)
    assert cache.hits == evaluated
    assert cache.misses == evaluated
    assert sum(t["cached"] for t in second["timing"]["rows"]) == evaluated
    assert first["rows"] == second["rows"]


def test_weight_change_misses_cache(tmp_path):
    cache = ResultCache(__version__, root=tmp_path / "c")
    doc = {"format": FORMAT, "kind": "affine", "section": ["z1^2"], "weight": "z1", "methods": ["contour"]}
    run(parse_scenario(doc), cache)
    doc["weight"] = "2*z1"
    rep = run(parse_scenario(doc), cache)
    assert cache.hits == 0
    assert abs(complex(*rep["rows"][0]["value"]) - 2) < 1e-10


def test_version_bump_misses_cache(tmp_path):
    run(load_scenario("cauchy"), ResultCache("0.0.1", root=tmp_path / "c"))
    cache = ResultCache(__version__, root=tmp_path / "c")
    run(load_scenario("cauchy"), cache)
    assert cache.hits == 0
    info = cache.gc()
    assert info["removed_versions"] == ["0.0.1"]


def test_write_report_files(tmp_path):
    report = run(load_scenario("cauchy"), ResultCache(__version__, enabled=False))
    pj, pc = write_report(report, tmp_path)
    body = json.loads(pj.read_text())
    assert body["format"] == "vresidue-report/1"
    assert "_traces" not in body
    rows = list(csv.DictReader(io.StringIO(pc.read_text())))
    assert rows and set(rows[0]) == {"component", "method", "level", "nodes", "value_re", "value_im", "error"}


def test_p2_point_components(tmp_path):
    report = run(load_scenario("p2-t0.3"), ResultCache(__version__, enabled=False))
    assert report["exit_code"] == EXIT_OK
    totals = [r for r in report["rows"] if r["component"] == "total"]
    assert {r["method"] for r in totals} == {"contour", "boundary", "oracle"}
    for r in totals:
        assert abs(complex(*r["value"])) < 1e-6


def test_sweep_eps(tmp_path):
    rows = sweep(load_scenario("p2-t0"), "eps", [0.1, 0.05])
    tube = [r for r in rows if r["component"] == "L0"]
    assert len(tube) == 2
    for r in tube:
        assert abs(r["value_re"] + 1) < 1e-6
    text = sweep_csv(rows)
    assert text.splitlines()[0].startswith("param,value,component,method")


def test_sweep_rejects_inapplicable_parameter():
    with pytest.raises(SweepError):
        sweep(load_scenario("p2-t0"), "budget", [1000])


def test_cli_sweep_to_file(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "mq-n1-z2", "--param", "t", "--values", "0.5", "1", "2", "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 3
    assert all(abs(float(r["value_re"]) - 1) < 1e-6 for r in rows)


def test_cli_sweep_bad_param(tmp_path):
    assert main(["sweep", "p2-t0", "--param", "budget", "--values", "1000"]) == EXIT_CONFIG


def test_cli_cache_gc(tmp_path, capsys):
    assert main(["cache", "gc"]) == EXIT_OK
    info = json.loads(capsys.readouterr().out)
    assert "removed_versions" in info


def test_cli_scenarios(capsys):
    assert main(["scenarios"]) == EXIT_OK
    assert "p2-t0.3" in capsys.readouterr().out


def test_cli_check_algebra(tmp_path, capsys):
    js = tmp_path / "c.json"
    assert main(["check", "algebra", "--json", str(js)]) == EXIT_OK
    data = json.loads(js.read_text())
    assert len(data) == 8 and all(d["passed"] for d in data)
    assert "8/8 checks passed" in capsys.readouterr().out


def test_cli_method_override(tmp_path):
    out = tmp_path / "o"
    assert main(["run", "cauchy", "--method", "oracle", "--out", str(out)]) == EXIT_OK
    body = json.loads((out / "report.json").read_text())
    assert {r["method"] for r in body["rows"]} == {"oracle"}
    assert body["settings"]["methods"] == ["oracle"]
