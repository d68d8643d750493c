"""Command-line surface: exit codes, file formats, determinism."""

import json
import subprocess
import sys

import pytest

from survroute.cli import main, read_front_csv, write_front_csv

from conftest import INSTANCE_DIR

TRIVIAL = str(INSTANCE_DIR / "trivial_1mr.net")
STANDARD = str(INSTANCE_DIR / "standard_3mr.net")


def run_cli(*argv):
    return main(list(argv))


class TestRun:
    def test_writes_front_and_summary(self, tmp_path):
        out = tmp_path / "run1"
        code = run_cli(
            "run", "--instance", STANDARD, "--out", str(out),
            "--budget", "2000", "--population", "15", "--offspring", "15", "--seed", "1",
        )
        assert code == 0
        assert (out / "front.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        # round trip: the summary echoes exactly the parameters the run used
        assert summary["params"] == {
            "population": 15, "offspring": 15, "capacity": 100, "budget": 2000,
            "stagnation_window": 10, "stagnation_tolerance": 1e-9,
            "immigrant_fraction": 0.3, "ls_budget": 20, "scheduler_window": 50,
            "scheduler_floor": 0.05, "seed": 1,
        }
        assert summary["evaluations"] >= 2000
        assert summary["final_hypervolume"] == summary["hypervolume_trace"][-1]

    def test_byte_identical_reruns(self, tmp_path):
        args = ["--instance", STANDARD, "--budget", "1500", "--population", "12",
                "--offspring", "12", "--seed", "9"]
        code1 = run_cli("run", *args, "--out", str(tmp_path / "a"))
        code2 = run_cli("run", *args, "--out", str(tmp_path / "b"))
        assert code1 == code2 == 0
        front_a = (tmp_path / "a" / "front.csv").read_bytes()
        front_b = (tmp_path / "b" / "front.csv").read_bytes()
        assert front_a == front_b
        sum_a = json.loads((tmp_path / "a" / "summary.json").read_text())
        sum_b = json.loads((tmp_path / "b" / "summary.json").read_text())
        sum_a.pop("wall_clock_seconds")
        sum_b.pop("wall_clock_seconds")
        assert sum_a == sum_b

    def test_front_matches_oracle(self, tmp_path):
        out = tmp_path / "run"
        assert run_cli("run", "--instance", STANDARD, "--out", str(out),
                       "--budget", "10000", "--seed", "0") == 0
        oracle_csv = tmp_path / "oracle.csv"
        assert run_cli("oracle", STANDARD, "--out", str(oracle_csv)) == 0
        got = {(z1, z2) for z1, z2, _g in read_front_csv(out / "front.csv")}
        want = {(z1, z2) for z1, z2, _g in read_front_csv(oracle_csv)}
        assert got == want

    def test_missing_instance_exits_3(self, tmp_path, capsys):
        code = run_cli("run", "--instance", str(tmp_path / "nope.net"), "--out", str(tmp_path / "o"))
        assert code == 3
        assert "survroute" in capsys.readouterr().err

    def test_no_instance_exits_2(self):
        assert run_cli("run", "--budget", "10") == 2

    def test_bad_instance_exits_3(self, tmp_path):
        bad = tmp_path / "bad.net"
        bad.write_text("BS b 1.5\n")
        assert run_cli("run", "--instance", str(bad), "--out", str(tmp_path / "o")) == 3

    def test_bad_param_exits_2(self, tmp_path):
        assert run_cli("run", "--instance", STANDARD, "--out", str(tmp_path / "o"),
                       "--population", "0") == 2

    def test_config_file_with_cli_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"instance = {STANDARD}\n"
            "budget = 1000   # comment\n"
            "population = 10\n"
            "offspring = 10\n"
            "seed = 5\n"
            f"out = {tmp_path / 'from_cfg'}\n"
        )
        assert run_cli("run", "--config", str(cfg), "--seed", "6") == 0
        summary = json.loads((tmp_path / "from_cfg" / "summary.json").read_text())
        assert summary["params"]["seed"] == 6  # CLI wins
        assert summary["params"]["budget"] == 1000

    def test_unknown_config_key_exits_2(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("wat = 1\n")
        assert run_cli("run", "--config", str(cfg)) == 2


class TestOracle:
    def test_trivial_front_csv(self, tmp_path):
        out = tmp_path / "front.csv"
        assert run_cli("oracle", TRIVIAL, "--out", str(out)) == 0
        text = out.read_text()
        lines = text.splitlines()
        assert lines[0] == "z1,z2,genotype"
        assert lines[1] == "1,0.3,m1=a1"
        assert lines[2] == "5,0,m1=a2"

    def test_guard_exits_4(self, tmp_path):
        assert run_cli("oracle", STANDARD, "--out", str(tmp_path / "f.csv"), "--guard", "10") == 4

    def test_missing_instance_exits_3(self, tmp_path):
        assert run_cli("oracle", str(tmp_path / "nope.net"), "--out", str(tmp_path / "f.csv")) == 3


class TestMeasure:
    def _write(self, path, rows):
        write_front_csv(path, rows)
        return str(path)

    def test_identity(self, tmp_path, capsys):
        f = self._write(tmp_path / "a.csv", [(1.0, 2.0, "x=y"), (2.0, 1.0, "y=x")])
        assert run_cli("measure", f, f, "--ref", "3,3") == 0
        report = json.loads(capsys.readouterr().out)
        assert report["additive_epsilon_ab"] == 0.0
        assert report["coverage_ab"] == 1.0
        assert report["coverage_ba"] == 1.0

    def test_worked_hypervolume(self, tmp_path, capsys):
        a = self._write(tmp_path / "a.csv", [(1.0, 2.0, "g1"), (2.0, 1.0, "g2")])
        b = self._write(tmp_path / "b.csv", [(2.0, 2.0, "g3")])
        assert run_cli("measure", a, b, "--ref", "3,3") == 0
        report = json.loads(capsys.readouterr().out)
        assert report["hypervolume_a"] == 3.0
        assert report["hypervolume_b"] == 1.0
        # for b's point (2,2): min over a of max-coordinate shift is 0
        assert report["additive_epsilon_ab"] == 0.0

    def test_empty_front_hv_zero(self, tmp_path, capsys):
        empty = tmp_path / "empty.csv"
        empty.write_text("z1,z2,genotype\n")
        full = self._write(tmp_path / "b.csv", [(1.0, 1.0, "g")])
        assert run_cli("measure", str(empty), str(full), "--ref", "3,3") == 0
        report = json.loads(capsys.readouterr().out)
        assert report["hypervolume_a"] == 0.0
        assert report["additive_epsilon_ab"] is None
        assert report["coverage_ab"] is None

    def test_malformed_csv_exits_2(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n1,2\n")
        good = self._write(tmp_path / "g.csv", [(1.0, 1.0, "g")])
        assert run_cli("measure", str(bad), str(good), "--ref", "3,3") == 2

    def test_bad_ref_exits_2(self, tmp_path):
        f = self._write(tmp_path / "a.csv", [(1.0, 2.0, "g")])
        assert run_cli("measure", f, f, "--ref", "banana") == 2

    def test_ref_not_dominating_exits_2(self, tmp_path):
        f = self._write(tmp_path / "a.csv", [(5.0, 5.0, "g")])
        assert run_cli("measure", f, f, "--ref", "3,3") == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "front.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "survroute", "oracle", TRIVIAL, "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert out.read_text().startswith("z1,z2,genotype\n")


@pytest.mark.parametrize("name", ["trivial_1mr", "standard_3mr", "stress_5mr"])
def test_committed_oracle_fronts_are_fresh(name, tmp_path):
    # the repo ships each instance's exact front; regeneration must agree byte for byte
    regenerated = tmp_path / "front.csv"
    assert run_cli("oracle", str(INSTANCE_DIR / f"{name}.net"), "--out", str(regenerated)) == 0
    assert regenerated.read_bytes() == (INSTANCE_DIR / f"{name}.front.csv").read_bytes()
