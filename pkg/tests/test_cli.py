import csv
import io
import json
import subprocess
import sys

import pytest

from rieszmorrey.harness.cli import main
from rieszmorrey.harness.config import SCHEMA


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExitCodes:
    def test_kernel_ok(self, capsys):
        code, out, _ = run(["check-kernel", "--alpha", "0.5"], capsys)
        assert code == 0
        reports = {r["condition"]: r for r in json.loads(out)}
        assert reports["tail-integral"]["empirical_C"] == pytest.approx(2.0, rel=1e-8)

    def test_condition_failure(self, capsys):
        code, out, _ = run(["check-conditions", "--preset", "spanne-endpoint"], capsys)
        assert code == 1
        assert any(r["divergent"] for r in json.loads(out))

    def test_config_error(self, capsys):
        code, _, err = run(["norm", "--preset", "no-such-preset"], capsys)
        assert code == 2 and "configuration error" in err

    def test_bad_toml(self, tmp_path, capsys):
        path = tmp_path / "bad.toml"
        path.write_text(f'schema = "{SCHEMA}"\nkind = "spanne"\nsurprise = 1\n')
        code, _, err = run(["experiment", "--config", str(path)], capsys)
        assert code == 2 and "surprise" in err

    def test_numerical_failure(self, tmp_path, capsys):
        path = tmp_path / "sing.toml"
        path.write_text(
            f'schema = "{SCHEMA}"\npreset = "spanne-classical"\n'
            '[[functions]]\nkind = "power-bump"\nid = "steep"\ngamma = 0.9\n'
        )
        code, _, err = run(["potential", "--config", str(path), "--x", "0", "0", "1"], capsys)
        assert code == 3 and "numerical failure" in err

    def test_unwritable_output(self, tmp_path, capsys):
        target = tmp_path / "nope" / "out.json"
        code, _, err = run(["check-kernel", "--alpha", "0.5", "--out", str(target)], capsys)
        assert code == 2 and "nope" in err


class TestCommands:
    def test_weight(self, capsys):
        code, out, _ = run(["check-weight", "--preset", "spanne-weighted"], capsys)
        assert code == 0
        assert {r["condition"] for r in json.loads(out)} == {"apq", "holder-lower-bound"}

    def test_norm_csv(self, capsys):
        code, out, _ = run(["norm", "--preset", "spanne-weak", "--format", "csv"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and [r["function_id"] for r in rows] == ["ind-0.1", "ind-1", "ind-10", "gauss"]

    def test_potential_csv(self, capsys):
        code, out, _ = run(["potential", "--preset", "spanne-classical", "--function", "ind-1",
                            "--x", "-1", "1", "3"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and list(rows[0]) == ["x", "value", "est_error"]
        # rho = t^{1/4}: int_{-1}^{1} |y|^{-3/4} dy = 8
        assert float(rows[1]["value"]) == pytest.approx(8.0, rel=1e-10)

    def test_unknown_function(self, capsys):
        code, _, err = run(["potential", "--preset", "spanne-classical", "--function", "nope"], capsys)
        assert code == 2 and "nope" in err

    def test_experiment_to_file(self, tmp_path, capsys):
        out = tmp_path / "hardy.json"
        code, _, _ = run(["experiment", "--preset", "hardy", "--out", str(out)], capsys)
        assert code == 0 and json.loads(out.read_text())["verdict"] == "bounded-evidence"

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "rieszmorrey", "check-kernel", "--alpha", "0.25"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0 and "tail-integral" in proc.stdout
