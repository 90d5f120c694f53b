import json

import numpy as np
import pytest

from qmac.cli import main
from qmac.fixtures import secure_example_unitary
from qmac.linalg import matrix_to_json


@pytest.fixture
def secure_file(tmp_path):
    path = tmp_path / "secure.json"
    path.write_text(json.dumps(matrix_to_json(secure_example_unitary())))
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestValidate:
    def test_secure_file_exit_zero(self, capsys, secure_file):
        code, out, _ = run_cli(
            capsys, "validate", "--input", secure_file, "--budget", "200"
        )
        assert code == 0
        body = json.loads(out)
        assert body["report"]["overall_secure"] is True
        assert body["seed"] == 0
        assert "input_sha256" in body

    def test_identity_exit_three(self, capsys):
        code, out, _ = run_cli(
            capsys, "validate", "--input", "identity", "--budget", "100"
        )
        assert code == 3
        assert json.loads(out)["report"]["overall_secure"] is False

    def test_wrong_dims_exit_two(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(matrix_to_json(np.eye(3))))
        code, _, err = run_cli(capsys, "validate", "--input", str(path))
        assert code == 2
        assert "4x4" in err

    def test_malformed_json_exit_two(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"rows": 4, "cols": 4, "data": [')
        code, _, err = run_cli(capsys, "validate", "--input", str(path))
        assert code == 2
        assert "line" in err  # position-bearing message

    def test_missing_input_exit_two(self, capsys):
        code, _, _ = run_cli(capsys, "validate")
        assert code == 2


class TestSimulate:
    def test_summary(self, capsys, secure_file):
        code, out, _ = run_cli(
            capsys, "simulate", "--input", secure_file, "--trials", "500"
        )
        assert code == 0
        body = json.loads(out)
        assert body["summary"]["acceptance_rate"] == 1.0
        assert body["summary"]["decode_accuracy"] == 1.0
        assert body["summary"]["mean_key_fidelity"] == pytest.approx(1.0, abs=1e-10)
        assert len(body["records"]) == 1000

    def test_empty_batch_flagged(self, capsys, secure_file):
        code, out, _ = run_cli(
            capsys, "simulate", "--input", secure_file, "--trials", "0"
        )
        assert code == 0
        body = json.loads(out)
        assert body["summary"]["empty"] is True
        assert body["records"] == []

    def test_byte_identical_reports(self, tmp_path, secure_file, capsys):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        for out in (out1, out2):
            assert main(
                ["simulate", "--input", secure_file, "--trials", "200",
                 "--seed", "42", "--out", str(out)]
            ) == 0
        capsys.readouterr()
        assert out1.read_bytes() == out2.read_bytes()


class TestAttack:
    def test_xblock_values(self, capsys):
        code, out, _ = run_cli(
            capsys, "attack", "--input", "x_block", "--trials", "2000",
            "--budget", "400",
        )
        assert code == 0
        body = json.loads(out)["attacks"]
        assert body["no_message"]["probability"] == pytest.approx(0.5, abs=1e-12)
        assert body["message"]["probability"] > 1 - 1e-6
        assert body["key_distinguishing"]["distinguishable"] is True
        assert body["key_reuse"]["ruled_out"] is False

    def test_identity_values(self, capsys):
        code, out, _ = run_cli(
            capsys, "attack", "--input", "identity", "--trials", "1000",
            "--budget", "300",
        )
        assert code == 0
        body = json.loads(out)["attacks"]
        assert body["no_message"]["probability"] == pytest.approx(1.0, abs=1e-12)
        assert body["message"]["probability"] > 1 - 1e-6
        assert body["key_distinguishing"]["distinguishable"] is False
        assert body["key_reuse"]["ruled_out"] is True

    def test_secure_example_regression(self, capsys, secure_file):
        code, out, _ = run_cli(
            capsys, "attack", "--input", secure_file, "--trials", "2000",
            "--budget", "500",
        )
        assert code == 0
        body = json.loads(out)["attacks"]
        assert body["no_message"]["probability"] == pytest.approx(
            (2 + np.sqrt(2)) / 4, abs=1e-9
        )
        assert body["message"]["probability"] < 1 - 1e-4
        assert abs(body["no_message"]["monte_carlo_delta"]) < 0.05
        assert body["key_reuse"]["ruled_out"] is True


class TestOptimize:
    def test_smoke_and_reproducible(self, tmp_path, capsys):
        args = [
            "optimize", "--seed", "7", "--restarts", "2", "--budget", "100",
            "--trials", "10",
        ]
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        trace = tmp_path / "trace.jsonl"
        assert main(args + ["--out", str(out1), "--trace-out", str(trace)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        capsys.readouterr()
        assert out1.read_bytes() == out2.read_bytes()
        lines = [json.loads(l) for l in trace.read_text().splitlines()]
        assert lines and all({"restart", "iter", "score"} <= set(l) for l in lines)

    def test_warm_start(self, capsys, secure_file):
        code, out, _ = run_cli(
            capsys, "optimize", "--restarts", "1", "--budget", "100",
            "--warm-start", secure_file,
        )
        assert code == 0
        body = json.loads(out)
        assert body["result"]["score"]["secure"] is True


class TestDemo:
    def test_demo_secure(self, capsys):
        code, out, err = run_cli(capsys, "demo", "--budget", "300")
        assert code == 0
        body = json.loads(out)
        assert body["report"]["overall_secure"] is True
        assert "secure=True" in err

    def test_tolerance_override_recorded(self, capsys):
        code, out, _ = run_cli(
            capsys, "demo", "--budget", "200", "--tol", "unitary=1e-8"
        )
        assert code == 0
        assert json.loads(out)["tolerances"]["unitary"] == 1e-8

    def test_unknown_tolerance_rejected(self, capsys):
        code, _, err = run_cli(capsys, "demo", "--tol", "bogus=1")
        assert code == 2
        assert "bogus" in err
