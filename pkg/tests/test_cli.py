import json
import math
import subprocess
import sys

import pytest

from fadingbc.cli import CSV_COLUMNS, canonical_json, main

CASE1 = {"h": [1, 2], "p": [0.5, 0.5], "g": 1.4142135623730951, "q": 1}


@pytest.fixture
def write_config(tmp_path):
    def _write(obj, name="chan.json"):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj), encoding="utf-8")
        return str(path)

    return _write


def test_analyze_case1(write_config, capsys):
    assert main(["analyze", "--config", write_config(CASE1)]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["case"] == "Case1"
    assert rec["x_star"] == pytest.approx(0.5, abs=1e-12)
    assert rec["sr_upper"] == pytest.approx(0.83496250072115618, abs=1e-12)
    assert rec["sr_ach"] == pytest.approx(0.83048202372184059, abs=1e-12)
    assert rec["gap"] == pytest.approx(0.0044804769993155945, abs=1e-12)
    assert rec["sr_upper"] == rec["d_value"] + rec["c_value"]
    assert rec["gap"] == rec["sr_upper"] - rec["sr_ach"]


@pytest.mark.parametrize(
    "cfg, code, error",
    [
        ({"h": [1, 2], "p": [0.5, 0.5], "g": 3, "q": 1}, 3, "strongly_degraded"),
        ({"h": [1, 2], "p": [0.6, 0.5], "g": 1.4, "q": 1}, 2, "invalid_pmf"),
        ({"h": [1, 1], "p": [0.5, 0.5], "g": 1, "q": 1}, 3, "degenerate_fading"),
        ({"h": [1, 2], "p": [0.5], "g": 1.4, "q": 1}, 2, "length_mismatch"),
        ({"h": [1, 2], "p": [0.5, 0.5], "g": 1.4}, 2, "invalid_config"),
        ({"h": [1, 2], "p": [0.5, 0.5], "g": 1.4, "q": 1, "extra": 1}, 2, "invalid_config"),
        ({"h": [1, 2], "p": [0.5, 0.5], "g": (1 / 0.625) ** 0.5, "q": 1}, 4, "root_count_mismatch"),
        ("{not json", 2, "invalid_config"),
    ],
)
def test_analyze_errors(write_config, capsys, cfg, code, error):
    assert main(["analyze", "--config", write_config(cfg)]) == code
    captured = capsys.readouterr()
    assert captured.out == ""
    lines = captured.err.strip().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["error"] == error


def test_analyze_round_trip_and_out(write_config, tmp_path):
    out = tmp_path / "report.json"
    assert main(["analyze", "--config", write_config(CASE1), "--out", str(out)]) == 0
    text = out.read_text(encoding="utf-8")
    assert text.endswith("\n") and "\r" not in text
    assert canonical_json(json.loads(text)) + "\n" == text


def test_nats(write_config, capsys):
    main(["analyze", "--config", write_config(CASE1)])
    bits = json.loads(capsys.readouterr().out)
    main(["analyze", "--config", write_config(CASE1), "--nats"])
    nats = json.loads(capsys.readouterr().out)
    assert nats["units"] == "nats"
    for key in ("d_value", "c_value", "sr_upper", "sr_ach", "gap", "gap_bound"):
        assert nats[key] == pytest.approx(bits[key] * math.log(2), rel=1e-15)
    assert nats["x_star"] == bits["x_star"]


def test_tolerance_override(write_config, capsys):
    cfg = dict(CASE1, p=[0.5, 0.5 + 1e-7], tolerances={"pmf_tol": 1e-6})
    assert main(["analyze", "--config", write_config(cfg)]) == 0
    capsys.readouterr()
    cfg = dict(CASE1, tolerances={"bogus": 1})
    assert main(["analyze", "--config", write_config(cfg)]) == 2


def _sweep(path, *extra):
    return subprocess.run(
        [sys.executable, "-m", "fadingbc", "sweep", "--config", path, *extra],
        capture_output=True,
        check=False,
    )


def test_sweep_case1_constant_offset(write_config):
    r = _sweep(write_config(CASE1), "--q-min", "0.5", "--q-max", "50", "--points", "20", "--log")
    assert r.returncode == 0
    lines = r.stdout.decode().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    rows = [dict(zip(CSV_COLUMNS, line.split(","))) for line in lines[1:]]
    assert len(rows) == 20
    qs = [float(row["q"]) for row in rows]
    assert qs == sorted(qs) and qs[0] == 0.5 and qs[-1] == 50.0
    g2 = CASE1["g"] ** 2
    offsets = [float(r["sr_upper"]) - 0.5 * math.log2(1 + g2 * float(r["q"])) for r in rows if r["case"] == "Case1"]
    assert len(offsets) == 20
    assert max(offsets) - min(offsets) <= 1e-9


def test_sweep_b2_zero_gap_and_determinism(write_config):
    path = write_config({"h": [1, 2], "p": [0.5, 0.5], "g": (10 / 3) ** 0.5, "q": 1})
    first = _sweep(path, "--q-min", "0.1", "--q-max", "10", "--points", "7")
    second = _sweep(path, "--q-min", "0.1", "--q-max", "10", "--points", "7")
    assert first.returncode == 0
    assert first.stdout == second.stdout
    rows = first.stdout.decode().splitlines()[1:]
    for line in rows:
        row = dict(zip(CSV_COLUMNS, line.split(",")))
        assert row["case"] == "Case2_B2"
        assert abs(float(row["gap"])) <= 1e-9
        assert row["error"] == ""


def test_sweep_two_points(write_config, capsys):
    assert main(["sweep", "--config", write_config(CASE1), "--q-min", "1", "--q-max", "2", "--points", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [line.split(",")[0] for line in lines[1:]] == ["1.0", "2.0"]


def test_sweep_error_rows(write_config, capsys):
    cfg = {"h": [1, 2], "p": [0.5, 0.5], "g": 3, "q": 1}
    assert main(["sweep", "--config", write_config(cfg), "--q-min", "1", "--q-max", "2", "--points", "3"]) == 3
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4
    assert all(line.endswith(",strongly_degraded") for line in lines[1:])


def test_sweep_bad_grid(write_config, capsys):
    assert main(["sweep", "--config", write_config(CASE1), "--q-min", "2", "--q-max", "1", "--points", "3"]) == 2
    assert main(["sweep", "--config", write_config(CASE1), "--q-min", "1", "--q-max", "2", "--points", "1"]) == 2


def test_verify_single_config(write_config, capsys):
    assert main(["verify", "--config", write_config(CASE1)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["all_passed"]
    assert summary["suites"]["stationarity"]["worst_residual"] < 1e-9
    assert summary["suites"]["root_count"]["passed"] == 1


def test_verify_two_state_random_has_no_inside_roots(capsys):
    code = main(["verify", "--random", "10", "--seed", "1"])
    summary = json.loads(capsys.readouterr().out)
    assert code in (0, 1)
    assert summary["suites"]["root_count"]["failed"] == 0


def test_canonical_json_floats():
    assert canonical_json({"b": 1.0, "a": [0.1, 1e-20, True, None, "x"]}) == (
        '{"a":[0.10000000000000001,9.9999999999999995e-21,true,null,"x"],"b":1.0}'
    )
    for x in (0.1, 1 / 3, 1e300, -2.5e-7, 123456789.0):
        assert float(canonical_json(x)) == x
