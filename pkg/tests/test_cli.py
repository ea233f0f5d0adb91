import csv
import json

import numpy as np

from simplexstab import cli
from simplexstab import geometry as g


def run_cli(args):
    return cli.main(args)


class TestExitCodes:
    def test_unknown_command_is_usage_error(self, capsys):
        assert run_cli(["definitely-not-a-command"]) == cli.EXIT_USAGE

    def test_unknown_flag_is_usage_error(self):
        assert run_cli(["transport", "constants", "--bogus"]) == cli.EXIT_USAGE

    def test_missing_file_is_usage_error(self, tmp_path):
        assert run_cli(["measure", "validate", "--in",
                        str(tmp_path / "missing.json")]) == cli.EXIT_USAGE

    def test_verification_failure_is_exit_two(self, tmp_path, capsys):
        bad = {"n": 2, "points": [[1.0, 0.0], [0.0, 1.0]], "weights": [1.0, 0.5]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        assert run_cli(["measure", "validate", "--in", str(path)]) == cli.EXIT_VERIFY

    def test_seed_is_mandatory_for_stochastic_commands(self):
        assert run_cli(["measure", "generate", "--n", "2", "--k", "8"]) == cli.EXIT_USAGE


class TestMeasurePipeline:
    def test_generate_validate_reduce_roundtrip(self, tmp_path):
        out = tmp_path / "m.json"
        assert run_cli(["measure", "generate", "--n", "2", "--k", "30",
                        "--seed", "3", "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["seed"] == 3
        assert payload["tool_version"]
        mu_path = tmp_path / "mu.json"
        mu_path.write_text(json.dumps(payload["measure"]))
        assert run_cli(["measure", "validate", "--in", str(mu_path)]) == 0
        red = tmp_path / "r.json"
        assert run_cli(["measure", "reduce", "--in", str(mu_path),
                        "--out", str(red)]) == 0
        reduced = json.loads(red.read_text())
        assert reduced["k_out"] <= 6

    def test_byte_identical_reports(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            assert run_cli(["measure", "generate", "--n", "3", "--k", "12",
                            "--seed", "9", "--out", str(path)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestEllipsoidCommands:
    def test_mvee_on_simplex_points(self, tmp_path):
        pts = tmp_path / "p.json"
        pts.write_text(json.dumps({"points": g.regular_simplex(3).vertices.tolist()}))
        out = tmp_path / "e.json"
        assert run_cli(["ellipsoid", "mvee", "--in", str(pts), "--eps", "1e-7",
                        "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        shape = np.array(data["ellipsoid"]["shape"])
        assert np.abs(shape - np.eye(3)).max() < 1e-8
        assert data["certificate"] <= 1e-7

    def test_john_decomposition_file(self, tmp_path):
        body = tmp_path / "b.json"
        body.write_text(json.dumps(g.regular_simplex(2).to_json()))
        out = tmp_path / "jd.json"
        assert run_cli(["ellipsoid", "john", "--in", str(body),
                        "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert np.abs(np.array(data["contacts"]["weights"]) - 2.0 / 3.0).max() < 1e-6


class TestFunctionalCommands:
    def test_ell_json_schema(self, tmp_path, capsys):
        body = tmp_path / "b.json"
        body.write_text(json.dumps(g.regular_simplex_polar(2).to_json()))
        assert run_cli(["functional", "ell", "--body", str(body),
                        "--n-samples", "20000", "--method", "layer",
                        "--seed", "1"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert set(data) >= {"value", "stderr", "method", "samples", "seed"}
        assert data["method"] == "layer-quadrature"

    def test_ball_body_and_crosscheck(self, tmp_path):
        body = tmp_path / "ball.json"
        body.write_text(json.dumps({"radius": 1.0, "n": 2}))
        assert run_cli(["functional", "crosscheck", "--body", str(body),
                        "--n-samples", "50000", "--seed", "2",
                        "--out", str(tmp_path / "c.json")]) == 0


class TestTransportCommands:
    def test_verify_csv(self, tmp_path):
        out = tmp_path / "margins.csv"
        assert run_cli(["transport", "verify-lemma61", "--grid", "80",
                        "--out", str(out)]) == 0
        rows = list(csv.DictReader(out.read_text().splitlines()))
        assert len(rows) == 15  # ten derivative bounds + five tail brackets
        assert all(row["pass"] == "True" for row in rows)

    def test_constants_json(self, capsys):
        assert run_cli(["transport", "constants"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert set(data["constants"]) == {"alpha", "beta", "gamma", "delta", "xi"}


class TestStabilityCommand:
    def test_run_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "report.csv"
        code = run_cli(["stability", "run", "--family", "vertex-added",
                        "--n", "2", "--eps", "2e-3..9e-2:6",
                        "--samples", "60000", "--seed", "4", "--out", str(out)])
        assert code == 0
        rows = list(csv.DictReader(out.read_text().splitlines()))
        assert len(rows) == 6
        assert set(rows[0]) == {"eps_nominal", "eps_measured", "delta_H",
                                "delta_vol", "bound_margin"}
        assert all(float(r["bound_margin"]) > 0 for r in rows)

    def test_eps_grid_parser(self):
        grid = cli._parse_eps_grid("1e-4..1e-2:5")
        assert len(grid) == 5
        assert abs(grid[0] - 1e-4) < 1e-12 and abs(grid[-1] - 1e-2) < 1e-12
        listed = cli._parse_eps_grid("0.01,0.02")
        assert listed.tolist() == [0.01, 0.02]


class TestSuite:
    def test_quick_suite_passes(self, tmp_path):
        out = tmp_path / "suite.json"
        assert run_cli(["suite", "--quick", "--seed", "7",
                        "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["all_pass"]
        assert len(data["checks"]) >= 8
