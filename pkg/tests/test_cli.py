import json

import numpy as np
import pytest

from proxpoint.cli import main
from proxpoint.experiment import parse_trace_csv


def read_solution(path):
    lines = path.read_text().strip().split("\n")[1:]
    return np.array([float(line.split(",")[1]) for line in lines])


def write_config(tmp_path, payload, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


class TestSolveCommand:
    def test_two_halfspace_corner(self, tmp_path):
        config = write_config(tmp_path, {
            "x0": {"zeros": 2},
            "constraints": [
                {"kind": "halfspace", "normal": [-1.0, 0.0], "offset": -1.0},
                {"kind": "halfspace", "normal": [0.0, -1.0], "offset": -1.0},
            ],
            "theta_tol": 1e-24,
            "step_tol": 1e-12,
            "max_iter": 5000,
        })
        out = tmp_path / "out"
        assert main(["solve", "--config", config, "--out", str(out)]) == 0
        x = read_solution(out / "solution_solve.csv")
        np.testing.assert_allclose(x, [1.0, 1.0], atol=1e-6)
        rows = parse_trace_csv(out / "trace_solve.csv")
        assert rows and rows[0].variant == "solve"

    def test_prescription_and_affine_kinds(self, tmp_path):
        # pin the first coordinate through a hyperplane and soft-threshold
        # the rest toward a known signal
        xbar = [1.7, 0.0, 0.0, 2.5]
        config = write_config(tmp_path, {
            "x0": {"zeros": 4},
            "constraints": [
                {"kind": "hyperplane", "normal": [1.0, 0.0, 0.0, 0.0], "offset": 1.7},
                {"kind": "soft_threshold_prescription", "omega": 1.0,
                 "p": [0.7, 0.0, 0.0, 1.5]},
                {"kind": "box", "lo": -3.0, "hi": 3.0},
            ],
            "affine_ids": [0],
            "theta_tol": 1e-24,
            "step_tol": 1e-11,
            "max_iter": 20000,
        })
        out = tmp_path / "out"
        assert main(["solve", "--config", config, "--out", str(out)]) == 0
        x = read_solution(out / "solution_solve.csv")
        np.testing.assert_allclose(x, xbar, atol=1e-4)

    def test_isotonic_observation_kind(self, tmp_path):
        rng = np.random.default_rng(0)
        xbar = rng.standard_normal(5)
        mat = rng.standard_normal((3, 5))
        from proxpoint.catalog import isotonic_projection
        q = isotonic_projection(mat @ xbar)
        config = write_config(tmp_path, {
            "x0": {"zeros": 5},
            "constraints": [
                {"kind": "isotonic_observation", "dictionary": mat.tolist(),
                 "q": q.tolist()},
            ],
            "max_iter": 3000,
        })
        out = tmp_path / "out"
        assert main(["solve", "--config", config, "--out", str(out)]) == 0
        x = read_solution(out / "solution_solve.csv")
        np.testing.assert_allclose(isotonic_projection(mat @ x), q, atol=1e-4)

    def test_infeasible_exit_code(self, tmp_path):
        config = write_config(tmp_path, {
            "x0": {"zeros": 1},
            "constraints": [
                {"kind": "halfspace", "normal": [1.0], "offset": -1.0},
                {"kind": "halfspace", "normal": [-1.0], "offset": -1.0},
            ],
            "max_iter": 500,
        })
        assert main(["solve", "--config", config, "--out", str(tmp_path / "o")]) == 2

    def test_unknown_key_exit_code(self, tmp_path):
        config = write_config(tmp_path, {"x0": [0.0], "constraints": [], "turbo": True})
        assert main(["solve", "--config", config]) == 3

    def test_unknown_kind_exit_code(self, tmp_path):
        config = write_config(tmp_path, {
            "x0": [0.0, 0.0],
            "constraints": [{"kind": "simplex"}],
        })
        assert main(["solve", "--config", config]) == 3

    def test_missing_parameter_exit_code(self, tmp_path):
        config = write_config(tmp_path, {
            "x0": [0.0, 0.0],
            "constraints": [{"kind": "ball"}],
        })
        assert main(["solve", "--config", config]) == 3

    def test_bad_json_exit_code(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["solve", "--config", str(path)]) == 3


class TestDemoCommand:
    def test_tiny_demo(self, tmp_path, capsys):
        config = write_config(tmp_path, {
            "n": 32, "b": 5, "k": 2, "block_dim": 3, "iters": 30, "seed": 4,
        }, name="demo.json")
        out = tmp_path / "demo_out"
        code = main(["demo", "--config", config, "--variant", "both",
                     "--out", str(out)])
        assert code == 0
        assert (out / "solution_affine.csv").exists()
        assert (out / "trace_plain.csv").exists()
        printed = capsys.readouterr().out
        assert "normalized error" in printed

    def test_env_seed_override(self, tmp_path, monkeypatch):
        config = {"n": 32, "b": 5, "k": 2, "block_dim": 3, "iters": 25}
        path = write_config(tmp_path, config, name="demo.json")
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        monkeypatch.setenv("PROXPOINT_SEED", "99")
        assert main(["demo", "--config", path, "--seed", "3", "--out", str(out_a)]) == 0
        monkeypatch.delenv("PROXPOINT_SEED")
        assert main(["demo", "--config", path, "--seed", "99", "--out", str(out_b)]) == 0
        assert ((out_a / "solution_affine.csv").read_bytes()
                == (out_b / "solution_affine.csv").read_bytes())

    def test_bad_demo_config(self, tmp_path):
        path = write_config(tmp_path, {"n": 32, "b": 4}, name="demo.json")
        assert main(["demo", "--config", path]) == 3


class TestCheckCommand:
    def test_reduced_suite_passes(self, capsys):
        assert main(["check", "--trials", "200"]) == 0
        printed = capsys.readouterr().out
        assert "FAIL" not in printed
        assert "checks passed" in printed
