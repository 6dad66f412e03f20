import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from contextgames.cli import CSV_HEADER, main
from contextgames.scenarios import builtin_scenario, scenario_to_json

DATA = Path(__file__).parent / "data"


def run(*args):
    out = io.StringIO()
    code = main(list(args), out)
    return code, out.getvalue()


def test_bounds_three_three():
    code, text = run("bounds", "--scenario", "33", "--restarts", "2")
    assert code == 0
    doc = json.loads(text)
    assert (doc["bounds"]["local"], doc["bounds"]["unc"]) == ("5", "4")
    assert doc["bounds"]["quantum"] == pytest.approx(6.0, abs=1e-9)
    assert doc["game"]["window"] == "nonlocal"
    assert "seesaw" in doc["bounds"]


def test_bounds_odd_five_via_n_flag():
    code, text = run("bounds", "--n", "5", "--restarts", "0")
    doc = json.loads(text)["bounds"]
    assert code == 0
    assert (doc["local"], doc["unc"]) == ("15", "8")
    assert doc["quantum"] == pytest.approx(10.0, abs=1e-9)


def test_bounds_four_three():
    code, text = run("bounds", "--scenario", "43", "--restarts", "0")
    doc = json.loads(text)["bounds"]
    assert (doc["local"], doc["unc"], doc["unc_label"]) == ("6", "4", "pnc")
    assert doc["quantum"] == pytest.approx(6.92820, abs=1e-5)


@pytest.mark.parametrize("args,code,status", [
    (("--scenario", "33", "--side", "preparation"), 1, "infeasible"),
    (("--scenario", "44", "--side", "preparation"), 0, "feasible"),
    (("--scenario", "33", "--side", "measurement", "--mode", "deterministic"), 1, "infeasible"),
    (("--scenario", "33", "--side", "measurement"), 0, "feasible"),
    (("--scenario", "34", "--side", "measurement", "--mode", "deterministic",
      "--party", "bob"), 0, "feasible"),
])
def test_logic_exit_codes(args, code, status):
    got, text = run("logic", *args)
    assert got == code
    doc = json.loads(text)
    assert doc["status"] == status and doc["verified"]
    assert ("witness" in doc) == (status == "feasible")


def test_game_command():
    code, text = run("game", "--scenario", "44")
    doc = json.loads(text)
    assert code == 0
    assert doc["window"] == "classical" and doc["boundary"]
    assert set(doc) >= {"game", "p_quantum", "p_local", "p_unc", "window"}


def test_scenario_list_and_dump():
    code, text = run("scenario", "--list")
    assert code == 0 and "nn:7" in json.loads(text)
    code, text = run("scenario", "--dump", "43")
    assert code == 0
    assert json.loads(text)["name"] == "43"


def test_custom_scenario_file(tmp_path):
    code, text = run("bounds", "--scenario", str(DATA / "scenario_44.json"), "--restarts", "0")
    assert code == 0
    assert json.loads(text)["bounds"]["local"] == "8"


def test_invalid_scenario_file_exits_three(tmp_path):
    doc = json.loads(scenario_to_json(builtin_scenario("33")))
    doc["alice"]["observables"][0]["bloch"] = [0.3, 0, 0.2]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert run("bounds", "--scenario", str(bad))[0] == 3
    broken = tmp_path / "broken.json"
    broken.write_text("{ not json")
    assert run("logic", "--scenario", str(broken))[0] == 3


@pytest.mark.parametrize("args", [
    ("bounds", "--bogus"),
    ("bounds", "--scenario", "99"),
    ("bounds", "--n", "4"),
    ("bounds", "--restarts", "-1"),
    ("logic", "--side", "sideways"),
    ("scenario",),
    (),
])
def test_bad_arguments_exit_two(args, capsys):
    assert run(*args)[0] == 2
    assert capsys.readouterr().err


def test_report_csv_header():
    code, text = run("report", "--format", "csv", "--restarts", "2")
    lines = text.splitlines()
    assert code == 0
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 10


def test_report_json_passes():
    code, text = run("report", "--restarts", "2")
    doc = json.loads(text)
    assert code == 0 and doc["passed"]
    assert [r["scenario"] for r in doc["rows"]][:2] == ["33", "nn:3"]
    assert any("44" in n for n in doc["notes"])


def test_report_is_deterministic():
    assert run("report", "--seed", "3", "--restarts", "3") == \
        run("report", "--seed", "3", "--restarts", "3")


def test_report_seed_stability():
    a = json.loads(run("report", "--seed", "1", "--restarts", "3")[1])
    b = json.loads(run("report", "--seed", "2", "--restarts", "3")[1])
    for ra, rb in zip(a["rows"], b["rows"]):
        for key in ("scenario", "local", "unc", "p_local", "p_unc", "window"):
            assert ra[key] == rb[key]
        assert float(ra["quantum"]) == pytest.approx(float(rb["quantum"]), abs=1e-8)


def test_table_format():
    code, text = run("report", "--format", "table", "--restarts", "2")
    assert code == 0
    assert text.splitlines()[0].split() == list(CSV_HEADER)
    assert "overall: PASS" in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "contextgames", "scenario", "--list",
                           "--format", "table"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.split()[0] == "33"
