import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from nodal_atlas.cli import main
from nodal_atlas.lattice import construct_high_vanishing
from nodal_atlas.sweep import random_items, random_shell_function, run_sweep, worker_count


def run(tmp_path, *args):
    out = tmp_path / "out.txt"
    code = main(list(args) + ["--out", str(out)])
    return code, out.read_text() if out.exists() else ""


def test_analyze_product_mode(tmp_path):
    code, text = run(tmp_path, "analyze", "--surface", "torus", "--product", "2", "1", "--grid", "256")
    doc = json.loads(text)
    assert code == 0
    assert (doc["counts"]["V"], doc["counts"]["E"], doc["counts"]["F"]) == (8, 16, 8)
    assert all(v["equality"] for v in doc["verdicts"] if v["theorem"] in ("critical_count", "order_sum"))


def test_analyze_sphere_csv(tmp_path):
    code, text = run(tmp_path, "analyze", "--surface", "sphere", "--ell", "3", "--m", "1", "--format", "csv",
                     "--grid", "256")
    assert code == 0
    rows = list(csv.reader(text.splitlines()[1:]))
    assert rows[1][:4] == ["Y[3,1]", "critical_count", "4", "4"]


def test_analyze_rectangle_domain_equality(tmp_path):
    code, text = run(tmp_path, "analyze", "--surface", "rectangle", "--jk", "2", "1", "--grid", "256")
    doc = json.loads(text)
    dom = [v for v in doc["verdicts"] if v["theorem"] == "domain_count"][0]
    assert code == 0 and dom["equality"] and dom["consistent"]


def test_json_output_is_byte_identical(tmp_path):
    args = ["analyze", "--surface", "sphere", "--ell", "4", "--m", "3", "--grid", "128"]
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_random_sweep_csv_is_reproducible(tmp_path, monkeypatch):
    monkeypatch.setenv("NODAL_ATLAS_THREADS", "1")
    args = ["sweep", "--surface", "torus", "--seed", "7", "--n", "6", "--shell", "5", "--shell", "25",
            "--format", "csv", "--grid", "128"]
    c1, t1 = run(tmp_path, *args)
    c2, t2 = run(tmp_path, *args)
    assert c1 == c2 == 0 and t1 == t2
    lines = t1.splitlines()
    assert lines[0].startswith("# nodal-atlas-sweep/")
    assert lines[1].startswith("label,seed,V,E,F,n,c,")
    assert len(lines) == 2 + 6 + 1 and lines[-1].startswith("min_slack")


def test_construct(tmp_path):
    code, text = run(tmp_path, "construct", "--n", "3")
    cert = json.loads(text)["certificate"]
    assert code == 0 and cert["attained_order"] >= 3 and cert["arcs_at_origin"] == 2 * cert["attained_order"]
    code, text = run(tmp_path, "construct", "--n", "3", "--paper-lambda")
    assert json.loads(text)["certificate"]["lambda"] == 5 ** 10


def test_r2(tmp_path):
    code, text = run(tmp_path, "r2", "--n", "325")
    doc = json.loads(text)
    assert code == 0 and doc["r2"] == doc["r2_bruteforce"] == 24 and doc["factorization"] == {"5": 2, "13": 1}


def test_export_svg(tmp_path):
    code, text = run(tmp_path, "export-svg", "--surface", "rectangle", "--jk", "2", "2", "--grid", "128")
    assert code == 0 and text.startswith("<svg") and text.rstrip().endswith("</svg>")
    assert text.count("<polyline") >= 4 and "#d62728" in text and "#1f77b4" in text


@pytest.mark.parametrize("args", [
    ["analyze"],
    ["analyze", "--surface", "torus"],
    ["analyze", "--surface", "sphere", "--ell", "2", "--m", "5"],
    ["analyze", "--surface", "rectangle", "--jk", "2", "1", "--grid", "4"],
    ["construct", "--n", "9"],
    ["construct", "--n", "5", "--paper-lambda"],
    ["r2"],
    ["frobnicate"],
])
def test_usage_errors_exit_one(args):
    try:
        code = main(args)
    except SystemExit as exc:  # argparse rejects the command itself
        code = exc.code
    assert code == 1


def test_bad_command_exit_code_from_shell():
    res = subprocess.run([sys.executable, "-m", "nodal_atlas", "frobnicate"], capture_output=True)
    assert res.returncode == 1


def test_missing_modes_file_is_a_usage_error(tmp_path):
    assert main(["analyze", "--surface", "torus", "--modes", str(tmp_path / "none.json")]) == 1


def test_unresolvable_input_exits_two(tmp_path):
    # a near-degenerate saddle whose nodal branches pass within 0.003 of each other
    _, cert = construct_high_vanishing(5)
    modes = tmp_path / "modes.json"
    modes.write_text(json.dumps(cert.to_json()))
    code, text = run(tmp_path, "analyze", "--surface", "torus", "--modes", str(modes), "--grid", "256")
    assert code == 2 and json.loads(text)["error"] == "extraction_failed"


def test_bad_thread_setting_is_a_usage_error(monkeypatch):
    monkeypatch.setenv("NODAL_ATLAS_THREADS", "0x")
    assert main(["sweep", "--surface", "rectangle", "--jk", "1", "1"]) == 1


def test_worker_count_respects_environment(monkeypatch):
    monkeypatch.setenv("NODAL_ATLAS_THREADS", "1")
    assert worker_count() == 1
    monkeypatch.setenv("NODAL_ATLAS_THREADS", "many")
    with pytest.raises(ValueError):
        worker_count()


def test_pinned_random_functions_have_a_nodal_critical_point():
    rng = np.random.default_rng(0)
    for lam in (1, 2, 5, 25):
        assert random_shell_function(lam, rng, pinned=True).eigenvalue == lam
    # items alternate between pinned and generic in blocks of len(shells)
    rows = run_sweep(random_items(4, 11, (5, 25)), workers=1)
    assert all(r.report is not None for r in rows)
    assert rows[0].seed == (11, 0, 0)
    assert rows[0].report.critical and rows[1].report.critical
