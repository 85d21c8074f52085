import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from lengyel_epstein.cli import main


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def test_simulate_converges(tmp_path):
    assert run(tmp_path, "simulate", "-a", "5", "-b", "1", "--x0", "0.5", "--y0", "1") == 0
    fate = json.loads((tmp_path / "fate.json").read_text())
    assert fate["schema"] == 1
    assert fate["fate"] == "ConvergedToEquilibrium"
    assert np.allclose(fate["final_state"], (1, 2), atol=1e-6)
    rows = list(csv.reader(open(tmp_path / "orbit.csv")))
    assert rows[0] == ["t", "x", "y"] and len(rows) > 10


def test_simulate_escapes(tmp_path):
    assert run(tmp_path, "simulate", "-a", "5", "-b", "1", "--x0", "-1", "--y0", "-10") == 0
    assert json.loads((tmp_path / "fate.json").read_text())["fate"] == "Escaped"


def test_simulate_fixed_point(tmp_path):
    assert run(tmp_path, "simulate", "-a", "5", "-b", "1", "--x0", "1", "--y0", "2") == 0
    fate = json.loads((tmp_path / "fate.json").read_text())
    assert fate["final_state"] == [1.0, 2.0]


@pytest.mark.parametrize("argv", [
    ["simulate", "-a", "-5", "-b", "1", "--x0", "1", "--y0", "2"],
    ["simulate", "-a", "5", "-b", "0", "--x0", "1", "--y0", "2"],
    ["simulate", "-a", "5", "-b", "1", "--x0", "1", "--y0", "2", "--rel-tol", "0.1"],
    ["hopf", "--a-range", "5", "10"],
    ["regions", "--a-range", "5", "1"],
])
def test_usage_errors_exit_2(tmp_path, argv):
    assert run(tmp_path, *argv) == 2


def test_argparse_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["simulate", "-a", "5"])
    assert e.value.code == 2


def test_portrait(tmp_path):
    assert run(tmp_path, "portrait", "-a", "24.712", "-b", "13.85") == 0
    svg = (tmp_path / "portrait.svg").read_text()
    assert svg.startswith("<?xml") and svg.rstrip().endswith("</svg>")
    assert svg.count('stroke-dasharray="6,4"') == 1  # the unstable inner cycle
    assert svg.count('stroke="#1f4e9c"') == 1  # the stable outer cycle
    assert "StableFocus" in svg


def test_portrait_no_cycles(tmp_path):
    assert run(tmp_path, "portrait", "-a", "5", "-b", "1") == 0
    svg = (tmp_path / "portrait.svg").read_text()
    assert "stroke-dasharray" not in svg and 'stroke="#1f4e9c"' not in svg


def test_regions(tmp_path):
    assert run(tmp_path, "regions", "--resolution", "20", "10") == 0
    doc = json.loads((tmp_path / "regions.json").read_text())
    assert np.allclose(doc["intersection"], (11.1803399, 4.4721360))
    assert np.allclose([doc["anchors"]["a1"], doc["anchors"]["a2"]], (3 * 3 ** 0.5, 5 * (5 / 3) ** 0.5))
    assert doc["probes"][0]["label"] == "InD"
    assert len(doc["labels"]) == 10 and len(doc["labels"][0]) == 20
    assert (tmp_path / "regions.svg").exists()


def test_regions_parallel_identical(tmp_path):
    run(tmp_path / "s", "regions", "--resolution", "12", "8")
    run(tmp_path / "p", "regions", "--resolution", "12", "8", "--workers", "3")
    assert (tmp_path / "s" / "regions.json").read_bytes() == (tmp_path / "p" / "regions.json").read_bytes()


def test_infinity(tmp_path):
    assert run(tmp_path, "infinity", "-a", "5", "-b", "1") == 0
    doc = json.loads((tmp_path / "infinity.json").read_text())
    assert [e["label"] for e in doc["infinite_equilibria"]] == ["I1", "I2", "I3", "I4"]
    assert len(doc["circle_equilibria"]) == 6
    assert doc["infinite_equilibria"][0]["eigenvalues"] == pytest.approx([1, 1])
    assert (tmp_path / "disk.svg").exists()


def test_hopf(tmp_path):
    assert run(tmp_path, "hopf") == 0
    rows = list(csv.reader(open(tmp_path / "hopf_scan.csv")))
    assert rows[0] == ["a", "b", "omega", "L1", "arc"] and len(rows) == 101
    doc = json.loads((tmp_path / "hopf.json").read_text())
    assert doc["l1_roots"][0] == pytest.approx(18.495075, abs=1e-5)


def test_cycles(tmp_path):
    assert run(tmp_path, "cycles", "-a", "24.712", "-b", "13.85") == 0
    doc = json.loads((tmp_path / "cycles.json").read_text())
    assert doc["schema"] == 1
    assert [c["stability"] for c in doc["cycles"]] == ["Unstable", "Stable"]
    for k in (1, 2):
        rows = list(csv.reader(open(tmp_path / f"cycle_{k}.csv")))
        assert rows[0] == ["t", "x", "y"]


def test_dulac(tmp_path):
    assert run(tmp_path, "dulac", "-a", "5", "-b", "1") == 0
    assert json.loads((tmp_path / "dulac.json").read_text())["holds"] is True
    run(tmp_path, "dulac", "-a", "20", "-b", "1")
    doc = json.loads((tmp_path / "dulac.json").read_text())
    assert doc["holds"] is False and doc["worst_value"] > 0


@pytest.mark.parametrize("suite", ["theorem1", "theorem2", "hopf", "dulac"])
def test_verify_suites_pass(tmp_path, suite, capsys):
    assert run(tmp_path, "verify", "--suite", suite, "--seed", "7") == 0
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert doc["passed"] and doc["suite"] == suite
    assert "FAIL" not in capsys.readouterr().out


def test_verify_hopf_reports_bautin(tmp_path):
    run(tmp_path, "verify", "--suite", "hopf")
    doc = json.loads((tmp_path / "verify.json").read_text())
    bautin = next(c for c in doc["checks"] if c["id"] == "3")
    assert bautin["values"]["root"] == pytest.approx(18.495, abs=1e-3)


def test_verify_failure_exit_1(tmp_path):
    # the cycles suite includes a criterion that does not hold numerically (see README)
    assert run(tmp_path, "verify", "--suite", "cycles", "--seed", "7") == 1


def test_determinism(tmp_path):
    for d in ("r1", "r2"):
        run(tmp_path / d, "simulate", "-a", "10", "-b", "3.4", "--x0", "3", "--y0", "5", "--t-max", "5")
        run(tmp_path / d, "portrait", "-a", "10", "-b", "3.4")
    for f in ("orbit.csv", "fate.json", "portrait.svg"):
        assert (tmp_path / "r1" / f).read_bytes() == (tmp_path / "r2" / f).read_bytes()


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "lengyel_epstein.cli", "simulate", "-a", "5", "-b", "1",
                        "--x0", "0.5", "--y0", "1", "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0 and "ConvergedToEquilibrium" in r.stdout
    r = subprocess.run([sys.executable, "-m", "lengyel_epstein.cli", "simulate", "-a", "-1", "-b", "1",
                        "--x0", "0.5", "--y0", "1", "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 2 and "error" in r.stderr
