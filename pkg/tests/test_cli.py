import json
import math
import subprocess
import sys

import numpy as np
import pytest

from blflow.cli import main

HOLDER = {
    "k": 1, "n": 2, "A": [[1.0, 1.0]], "inv_p": [0.5, 0.5],
    "B": {"variant": "young", "alpha": [0.5, 0.5]},
    "profiles": [{"type": "box", "lo": 0.0, "hi": 1.0, "height": 1.0},
                 {"type": "box", "lo": 0.0, "hi": 2.0, "height": 1.0}],
}

YOUNG3 = {
    "k": 2, "n": 3, "A": [[1.0, 1.0, 0.0], [0.0, -1.0, 1.0]],
    "inv_p": [2 / 3, 2 / 3, 2 / 3],
    "B": {"variant": "young", "alpha": [2 / 3, 2 / 3, 2 / 3]},
}

OUTSIDE = {
    "k": 2, "n": 3, "A": [[1.0, 2.0, 0.0], [0.0, 0.0, 1.0]],
    "inv_p": [0.6, 0.6, 0.8],
}


def write(tmp_path, doc, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith(("{", "[")) else out


class TestFiniteness:
    def test_inside(self, tmp_path, capsys):
        code, doc = run_json(capsys, ["finiteness", write(tmp_path, YOUNG3)])
        assert code == 0
        assert doc["verdict"] == "inside"
        assert doc["basis_count"] == 3
        assert np.allclose(doc["certificate"], [1 / 3, 1 / 3, 1 / 3], atol=1e-9)

    def test_outside(self, tmp_path, capsys):
        code, doc = run_json(capsys, ["finiteness", write(tmp_path, OUTSIDE)])
        assert code == 0
        assert doc["verdict"] == "outside"
        assert doc["certificate"] is None


class TestConstant:
    def test_holder_is_one(self, tmp_path, capsys):
        code, doc = run_json(capsys, ["constant", write(tmp_path, HOLDER)])
        assert code == 0
        assert doc["status"] == "converged"
        assert abs(doc["D"] - 1.0) <= 1e-9

    def test_young_value(self, tmp_path, capsys):
        code, doc = run_json(capsys, ["constant", write(tmp_path, YOUNG3)])
        assert code == 0
        assert doc["D"] == pytest.approx(0.8660254037844388, rel=1e-9)

    def test_outside_reports_divergence(self, tmp_path, capsys):
        code, doc = run_json(capsys, ["constant", write(tmp_path, OUTSIDE)])
        assert code == 0
        assert doc["status"] == "sup not attained / infinite"
        assert doc["warnings"]


class TestSolveC:
    def test_young_certificate(self, tmp_path, capsys):
        code, doc = run_json(capsys, ["solve-c", write(tmp_path, YOUNG3)])
        assert code == 0
        assert doc["converged"]
        # C is proportional to (A A^T)^{-1} at the symmetric solution
        AAT_inv = np.linalg.inv(np.array(YOUNG3["A"]) @ np.array(YOUNG3["A"]).T)
        C = np.array(doc["C"])
        scale = C[0, 0] / AAT_inv[0, 0]
        assert np.allclose(C, scale * AAT_inv, rtol=1e-8)
        assert np.allclose(doc["s_sq"], [1 / 3, 1 / 3, 1 / 3], atol=1e-9)
        assert doc["inverse_defect"] <= 1e-9
        assert doc["projection"]["ok"] and doc["projection"]["rank"] == 2

    def test_writes_out_file(self, tmp_path, capsys):
        out = tmp_path / "cert.json"
        code = main(["solve-c", write(tmp_path, YOUNG3), "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["converged"]


class TestVerify:
    def test_young_passes(self, tmp_path, capsys):
        code, doc = run_json(capsys, ["verify", write(tmp_path, YOUNG3)])
        assert code == 0
        assert doc["ok"] and doc["l3"]["ok"] and doc["pde"]["ok"]
        assert doc["rank"]["worst"] <= doc["rank"]["bound"]

    def test_section_triple_with_explicit_C(self, tmp_path, capsys):
        doc_in = {
            "k": 2, "n": 3,
            "A": [[0.0, 0.0, 1 / math.sqrt(2.0)], [1.0, 1.0, 0.0]],
            "B": {"variant": "lifted", "phi": "sqrt_uv", "alpha": [1.0],
                  "section_vars": [0, 1]},
            "C": [[2.0, 0.0], [0.0, 1.0]],
        }
        code, doc = run_json(capsys, ["verify", write(tmp_path, doc_in)])
        assert code == 0
        assert doc["ok"]
        assert doc["pde"]["defect"] <= 1e-10

    def test_bad_certificate_exits_one(self, tmp_path, capsys):
        doc_in = dict(YOUNG3)
        doc_in["C"] = [[2.0, 0.0], [0.0, 2.0]]  # wrong off-diagonal
        code, doc = run_json(capsys, ["verify", write(tmp_path, doc_in)])
        assert code == 1
        assert not doc["ok"]


class TestFlow:
    def test_box_flow_csv(self, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        code = main(["flow", write(tmp_path, HOLDER), "--out", str(out),
                     "--format", "csv"])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "t,B_t,L,refinement"
        rows = [line.split(",") for line in lines[1:]]
        values = [float(r[1]) for r in rows]
        assert float(rows[0][0]) == 0.0 and values[0] == pytest.approx(1.0, abs=1e-8)
        assert math.sqrt(2.0) - 1e-3 <= values[-1] <= math.sqrt(2.0) + 1e-8
        assert all(b >= a - 1e-8 for a, b in zip(values, values[1:]))
        # stdout carries the same CSV
        assert capsys.readouterr().out.splitlines()[0] == "t,B_t,L,refinement"

    def test_json_report_with_tmax(self, tmp_path, capsys):
        code, doc = run_json(capsys, ["flow", write(tmp_path, HOLDER),
                                      "--tmax", "10"])
        assert code == 0
        assert doc["monotone"] and doc["label"] == "certified"
        assert max(doc["times"]) == 10.0
        assert doc["limit_value"] == pytest.approx(math.sqrt(2.0), rel=1e-8)


class TestExitCodes:
    def test_missing_file(self, capsys):
        assert main(["finiteness", "/nonexistent/problem.json"]) == 2

    def test_malformed_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{broken")
        assert main(["finiteness", str(path)]) == 2

    def test_rank_deficient_matrix(self, tmp_path, capsys):
        doc = {"k": 2, "n": 3, "A": [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]],
               "inv_p": [0.5, 0.5, 0.5]}
        assert main(["finiteness", write(tmp_path, doc)]) == 2

    def test_missing_exponents(self, tmp_path, capsys):
        doc = {"k": 1, "n": 2, "A": [[1.0, 1.0]]}
        assert main(["constant", write(tmp_path, doc)]) == 2

    def test_rejected_certificate(self, tmp_path, capsys):
        # C with <C a_3, a_3> < 0 must be rejected, not treated as input error
        doc = dict(YOUNG3)
        doc["C"] = [[1.0, 0.0], [0.0, -1.0]]
        assert main(["verify", write(tmp_path, doc)]) == 4

    def test_entry_point_installed(self, tmp_path):
        path = write(tmp_path, YOUNG3)
        proc = subprocess.run([sys.executable, "-m", "blflow.cli",
                               "finiteness", path],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["verdict"] == "inside"

    def test_threads_env(self, tmp_path):
        path = write(tmp_path, YOUNG3)
        proc = subprocess.run([sys.executable, "-m", "blflow.cli",
                               "finiteness", path],
                              capture_output=True, text=True,
                              env={"BLFLOW_THREADS": "1",
                                   "PATH": "/usr/bin:/bin:/usr/local/bin"})
        assert proc.returncode == 0
