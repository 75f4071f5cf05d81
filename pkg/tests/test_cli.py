import json
import subprocess
import sys
from pathlib import Path

import pytest

from sdpn.cli import main

from conftest import DRIVER_INIT, DRIVER_TARGET, EXAMPLES

GOLDEN = Path(__file__).parent / "golden"
FIG = ["--init", "pM m0", "--target", "ANY* pM m2 ANY*"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def without_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def test_fig7_prefix_order_two_report(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "check", "--model", "fig7.sdpn", *FIG, "--mode", "order",
                       "--abstraction", "prefix", "--order", "2", "--report", str(report))
    assert code == 0
    assert "paths: {b!, b! a!, b! a?, b! tau}" in out
    data = json.loads(report.read_text())
    assert data["result"]["checks"][0]["abstract_paths"] == ["b!", "b! a!", "b! a?", "b! tau"]
    assert data["configuration"]["order"] == 2
    assert "total_seconds" in data["timing"]


def test_report_matches_golden_apart_from_timing(capsys, tmp_path):
    paths = []
    for k in range(2):
        paths.append(tmp_path / f"r{k}.json")
        run(capsys, "check", "--model", "fig8.sdpn", *FIG, "--max-order", "3", "--report", str(paths[-1]))
    a, b = (json.loads(p.read_text()) for p in paths)
    assert without_timing(a) == without_timing(b)
    golden = json.loads((GOLDEN / "fig8_cegar_report.json").read_text())
    assert without_timing(a) == golden


def test_driver_cegar_is_reachable_with_a_twelve_step_trace(capsys, tmp_path):
    report = tmp_path / "d.json"
    code, out, _ = run(capsys, "check", "--model", "driver.sdpn", "--init", DRIVER_INIT, "--target", DRIVER_TARGET,
                       "--mode", "cegar", "--max-order", "12", "--budget", "12", "--report", str(report))
    assert code == 1
    data = json.loads(report.read_text())
    assert data["result"]["trace"]["length"] == 12
    assert data["result"]["trace"]["steps"][-1]["result"] == "p0 1 0 . p1 TSF . p2 TSE . p3 R . p4 A . p5 g0"


def test_inconclusive_order_check_exits_unknown(capsys):
    code, out, _ = run(capsys, "check", "--model", "fig8", *FIG, "--mode", "order", "--abstraction", "prefix")
    assert code == 2 and "counterexample of length 2" in out


@pytest.mark.parametrize("argv", [
    ["check", "--init", "pM m0", "--target", "pM m2"],
    ["check", "--model", "fig7.sdpn", *FIG, "--mode", "bogus"],
    ["check", "--model", "fig7.sdpn", *FIG, "--order", "x"],
    ["frobnicate"],
    [],
])
def test_usage_errors_exit_64(capsys, argv):
    with pytest.raises(SystemExit) as err:
        main(argv)
    assert err.value.code == 64


@pytest.mark.parametrize("argv, fragment", [
    (["check", "--model", "nope.sdpn", *FIG], "not found"),
    (["check", "--model", "fig7.sdpn", "--init", "pM zz", "--target", "pM m2"], "undeclared"),
    (["check", "--model", "fig7.sdpn", "--target", "pM m2"], "--init is required"),
    (["check", "--model", "fig7.sdpn", *FIG, "--mode", "order", "--order", "0"], "at least 1"),
])
def test_input_errors_exit_64(capsys, argv, fragment):
    code, _, err = run(capsys, *argv)
    assert code == 64 and fragment in err


def test_model_parse_errors_exit_64(capsys, tmp_path):
    bad = tmp_path / "bad.sdpn"
    bad.write_text("states: p\nstack: g\nrules:\n  p g -tau-> q\n")
    code, _, err = run(capsys, "check", "--model", str(bad), "--init", "p g", "--target", "p")
    assert code == 64 and "4:" in err


def test_resource_exhaustion_exits_65(capsys):
    code, _, err = run(capsys, "simulate", "--model", "fig8.sdpn", *FIG, "--depth", "30", "--max-nodes", "10")
    assert code == 65 and "node cap" in err


def test_emit_automata(capsys, tmp_path):
    out = tmp_path / "auto"
    run(capsys, "check", "--model", "fig7.sdpn", *FIG, "--mode", "order", "--emit-automata", str(out))
    assert sorted(p.name for p in out.iterdir()) == ["init.txt", "product.txt", "saturated.txt", "target.txt"]
    assert (out / "target.txt").read_text() == (GOLDEN / "fig7_target.txt").read_text().replace(
        "# fig7 target", "# target")


def test_trace_solver_logs_updates(capsys):
    code, _, err = run(capsys, "check", "--model", "fig7.sdpn", *FIG, "--mode", "order", "--order", "1",
                       "--abstraction", "prefix", "--trace-solver")
    assert code == 0 and " -> {" in err


def test_simulate_driver(capsys):
    code, out, _ = run(capsys, "simulate", "--model", "driver.sdpn", "--init", DRIVER_INIT,
                       "--target", DRIVER_TARGET, "--depth", "12")
    assert code == 1
    assert out.startswith("trace of length 12")
    assert out.rstrip().endswith("p0 1 0 . p1 TSF . p2 TSE . p3 R . p4 A . p5 g0")


def test_simulate_empty_trace_and_none(capsys):
    code, out, _ = run(capsys, "simulate", "--model", "fig7.sdpn", "--init", "pM m0", "--target", "pM m0",
                       "--depth", "0")
    assert code == 1 and out.startswith("trace of length 0")
    code, out, _ = run(capsys, "simulate", "--model", "fig7.sdpn", *FIG, "--depth", "6")
    assert code == 2 and out.strip() == "none"


def test_program_models_default_to_their_start(capsys):
    code, out, _ = run(capsys, "check", "--model", str(EXAMPLES / "handoff.cfgp"),
                       "--target", "ANY* _ Worker_bad_got0 ANY*", "--max-order", "2")
    assert code == 0
    code, out, _ = run(capsys, "check", "--model", "handoff.cfgp", "--target", "ANY* _ Main_m4 ANY*",
                       "--budget", "8")
    assert code == 1 and "7-step trace" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sdpn", "check", "--model", "fig8.sdpn", *FIG],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "suffix abstraction of order 2" in proc.stdout
