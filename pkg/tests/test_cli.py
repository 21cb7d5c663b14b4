import hashlib
import json
from pathlib import Path

import pytest

from sixvertex.cli import main, parse_complex, parse_seeds, parse_tolerances
from sixvertex.errors import ConfigError
from sixvertex.suites import SuiteConfig, run_suite

GOLDEN = Path(__file__).parent / "golden" / "fbasis_L3_seed7.json"


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_report_matches_golden_schema(capsys):
    code, out, _ = _run(capsys, "fbasis", "--L", "3", "--rho", "2,0", "--seed", "7")
    assert code == 0
    rep = json.loads(out)
    golden = json.loads(GOLDEN.read_text())
    assert sorted(rep) == golden["top_keys"]
    assert [r["identifier"] for r in rep["records"]] == golden["identifiers"]
    assert rep["values"]["config"] == golden["config"]
    for rec in rep["records"]:
        assert sorted(rec) == golden["record_keys"]
        assert isinstance(rec["residual"], str) and isinstance(rec["tolerance"], str)
        assert float(rec["residual"]) < float(rec["tolerance"])
        assert rec["pass"] is True
    assert isinstance(rep["version"], str) and rep["seed"] == 7 and rep["pass"] is True
    assert all(isinstance(float(v), float) for v in rep["timings_ms"].values())


@pytest.mark.parametrize("suite", ["unitarity", "yang-baxter", "fbasis", "twisted", "dwpf", "scalar",
                                   "bethe", "identities", "all"])
def test_every_suite_passes_on_two_sites(capsys, suite):
    code, out, err = _run(capsys, suite, "--L", "2", "--M", "1", "--seed", "0-1")
    assert code == 0, err
    assert json.loads(out)["pass"] is True


def _digest(report):
    data = report.to_json()
    data.pop("timings_ms")
    return hashlib.md5(json.dumps(data, sort_keys=True).encode()).hexdigest()


def test_output_independent_of_thread_count(monkeypatch):
    cfg = dict(suite="all", L=3, M=1, seeds=[0, 1, 2])
    monkeypatch.setenv("SIXVERTEX_THREADS", "1")
    serial = _digest(run_suite(SuiteConfig(**cfg)))
    monkeypatch.setenv("SIXVERTEX_THREADS", "4")
    assert _digest(run_suite(SuiteConfig(**cfg))) == serial


@pytest.mark.parametrize("argv", [
    ["fbasis", "--L", "11"],
    ["scalar", "--L", "3", "--M", "4"],
    ["bethe", "--weights", "generic"],
    ["dwpf", "--rho", "1,0"],
    ["dwpf", "--seed", "x"],
    ["dwpf", "--tol", "dwpf=-1"],
])
def test_config_errors_exit_two(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == 2
    assert "config error" in err


def test_unknown_suite_exits_two():
    with pytest.raises(SystemExit) as info:
        main(["nonsense"])
    assert info.value.code == 2


def test_tight_tolerance_fails_with_named_record(capsys):
    code, out, err = _run(capsys, "dwpf", "--M", "3", "--tol", "route-spread=1e-300")
    assert code == 1
    assert "FAIL seed=0/route-spread[B]" in err
    assert json.loads(out)["pass"] is False


def test_report_written_to_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = _run(capsys, "dwpf", "--M", "2", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["suite"] == "dwpf"


def test_benchmark_reports_timings(capsys):
    code, out, _ = _run(capsys, "benchmark", "--M", "3")
    rep = json.loads(out)
    assert code == 0
    assert {"sum[M=3]", "determinant[M=3]"} <= set(rep["timings_ms"])
    assert "speedup[M=3]" in rep["values"]


@pytest.mark.parametrize("text,expected", [("0.6,0.3", 0.6 + 0.3j), ("2", 2 + 0j), ("-1,-0.5", -1 - 0.5j)])
def test_parse_complex(text, expected):
    assert parse_complex(text) == expected


def test_parse_seeds():
    assert parse_seeds(["1,3", "5-7"]) == [1, 3, 5, 6, 7]
    assert parse_seeds(None) == [0]


def test_parse_tolerances():
    assert parse_tolerances(["yb1=1e-9", "dwpf=1e-6"]) == {"yb1": 1e-9, "dwpf": 1e-6}


def test_config_validation_direct():
    with pytest.raises(ConfigError):
        SuiteConfig("dwpf", M=9, L=9).validate()
