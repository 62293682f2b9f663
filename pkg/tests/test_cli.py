import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from gocc_lab.cli import main, sweep_coherent_rows

GOLDEN = Path(__file__).parent / "golden"

GOLDEN_RUNS = {
    "sweep_steps11.csv": ["sweep-coherent", "--steps", "11"],
    "bounds_m2.json": ["bounds", "--m", "2"],
    "protocol_homodyne.json": ["protocol", "builtin:homodyne_sign", "--pm-alpha", "0.45",
                               "--trials", "20000", "--seed", "3"],
    "chernoff_a05.json": ["chernoff", "--alpha", "0.5", "--mc-samples", "20000", "--seed", "1"],
    "hide_m2.json": ["hide", "--m", "2", "--n-seeds", "2", "--mc-samples", "10000"],
}


def run(args, tmp_path, name="out"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, out


def assert_close_tree(a, b, path="$"):
    if isinstance(a, dict):
        assert isinstance(b, dict) and list(a) == list(b), path
        for k in a:
            assert_close_tree(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert isinstance(b, list) and len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            assert_close_tree(x, y, f"{path}[{i}]")
    elif isinstance(a, float) and not isinstance(b, bool):
        assert b == pytest.approx(a, rel=1e-9, abs=1e-12), path
    else:
        assert a == b, path


@pytest.mark.parametrize("name", sorted(GOLDEN_RUNS))
def test_golden(name, tmp_path):
    code, out = run(GOLDEN_RUNS[name], tmp_path)
    assert code == 0
    expected = (GOLDEN / name).read_text()
    got = out.read_text()
    if name.endswith(".json"):
        assert_close_tree(json.loads(expected), json.loads(got))
    else:
        exp_lines, got_lines = expected.splitlines(), got.splitlines()
        assert got_lines[:2] == exp_lines[:2] and got_lines[-1] == exp_lines[-1]
        for e, g in zip(exp_lines[2:-1], got_lines[2:-1]):
            assert [float(v) for v in g.split(",")] == pytest.approx([float(v) for v in e.split(",")], rel=1e-9)


@pytest.mark.parametrize("name", ["protocol_homodyne.json", "chernoff_a05.json"])
def test_byte_identical_reruns(name, tmp_path):
    _, a = run(GOLDEN_RUNS[name], tmp_path, "a")
    _, b = run(GOLDEN_RUNS[name], tmp_path, "b")
    assert a.read_bytes() == b.read_bytes()


def test_seed_changes_output(tmp_path):
    args = GOLDEN_RUNS["protocol_homodyne.json"]
    _, a = run(args, tmp_path, "a")
    _, b = run(args[:-1] + ["4"], tmp_path, "b")
    assert a.read_bytes() != b.read_bytes()


def test_sweep_rows():
    alpha, ht, hg, gap = sweep_coherent_rows(0.0, 2.0, 201)
    assert (ht[0], hg[0], gap[0]) == (0.0, 0.0, 0.0)
    assert gap[-1] < 0.01
    k = gap.argmax()
    assert 0.44 <= alpha[k] <= 0.46
    assert gap[k] == pytest.approx(0.113, abs=0.002)


def test_chernoff_zero_alpha(tmp_path):
    code, out = run(["chernoff", "--alpha", "0", "--mc-samples", "10000"], tmp_path)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["quantum_chernoff"] == pytest.approx(0.0, abs=1e-12)
    assert doc["classical_chernoff_mc"] == pytest.approx(0.0, abs=1e-12)
    assert doc["ratio"] is None


def test_hide_override_single_pair(tmp_path):
    code, out = run(["hide", "--m", "1", "--L", "1", "--n-seeds", "1", "--mc-samples", "10000"], tmp_path)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["params"]["L_source"] == "override"
    assert len(doc["reports"]) == 1


def test_protocol_states_file(tmp_path):
    states = tmp_path / "s.yaml"
    states.write_text("r0: {points: [[0.45]]}\nr1: {points: [[-0.45]], weights: [1.0]}\n")
    code, out = run(["protocol", "builtin:homodyne_sign", "--states", str(states), "--trials", "20000",
                     "--seed", "3"], tmp_path)
    assert code == 0
    doc = json.loads(out.read_text())
    gold = json.loads((GOLDEN / "protocol_homodyne.json").read_text())
    assert doc["p_err"] == gold["p_err"]


@pytest.mark.parametrize("args", [
    ["sweep-coherent", "--alpha-min", "2", "--alpha-max", "1"],
    ["sweep-coherent", "--steps", "1"],
    ["hide", "--m", "4", "--delta", "0.5"],
    ["protocol", "builtin:homodyne_sign"],
    ["protocol", "/nonexistent/p.yaml", "--pm-alpha", "0.1"],
    ["bounds", "--t", "3"],
])
def test_exit_code_bad_arguments(args, tmp_path):
    assert run(args, tmp_path)[0] == 2


def test_argparse_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["chernoff", "--alpha", "abc"])
    assert info.value.code == 2


def test_exit_code_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("version: 1\nmodes: 1\nrounds:\n  - measure: zero\ndecision: {type: sign, coefficients: [1]}\n")
    assert run(["protocol", str(bad), "--pm-alpha", "0.1"], tmp_path)[0] == 3
    err = capsys.readouterr().err
    assert "line 4" in err and "rounds[0].measure" in err


def test_exit_code_bad_states_file(tmp_path):
    states = tmp_path / "s.yaml"
    states.write_text("r0: {points: [[0.45]]}\n")
    assert run(["protocol", "builtin:homodyne_sign", "--states", str(states)], tmp_path)[0] == 3


def test_exit_code_numeric_guard(tmp_path):
    assert run(["chernoff", "--alpha", "3", "--cutoff", "5", "--mc-samples", "10000"], tmp_path)[0] == 4


def test_console_script_help():
    proc = subprocess.run([sys.executable, "-m", "gocc_lab.cli", "hide", "--help"],
                          capture_output=True, text=True, check=True)
    assert "default: 0.05" in proc.stdout


def test_nan_serialized_as_null(tmp_path, monkeypatch):
    import gocc_lab.hiding as hiding

    monkeypatch.setattr(hiding, "MAX_GRAM_POINTS", 2)
    monkeypatch.setattr(hiding.run_hiding_experiment, "__defaults__", (None, None, None, 2))
    code, out = run(["hide", "--m", "2", "--n-seeds", "1", "--mc-samples", "10000"], tmp_path)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["reports"][0]["trace_dist_half"] is None
    assert doc["medians"]["trace_dist_half"] is None
    assert not math.isnan(doc["medians"]["l1_w0_w1"])
