import json

import pytest
import yaml
from click.testing import CliRunner

from kgdedup.cli import EXIT_CONFIG, EXIT_DATA, main

CONFIG_YAML = """\
compare:
  op: wavg
  children:
    - property: name
      metric: jaro-winkler
      cleaners: [lowercase, collapse-whitespace]
    - property: geo
      metric: geo
      params: {scale_meters: 500.0}
threshold: 0.85
min_comparable_leaves: 2
fusion:
  unique: [name]
  properties:
    name: voting
"""


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def workdir(tmp_path):
    (tmp_path / "run.yaml").write_text(CONFIG_YAML)
    return tmp_path


def generate(runner, workdir, entities=80, duplicates=8, seed=3):
    result = runner.invoke(main, [
        "generate", "--entities", str(entities), "--duplicates", str(duplicates),
        "--seed", str(seed),
        "--out", str(workdir / "data.csv"), "--gold-out", str(workdir / "gold.csv"),
    ])
    assert result.exit_code == 0, result.output
    return result


def run_pipeline(runner, workdir, extra=()):
    result = runner.invoke(main, [
        "run", "--config", str(workdir / "run.yaml"),
        "--input", str(workdir / "data.csv"),
        "--out", str(workdir / "results.jsonl"), *extra,
    ])
    assert result.exit_code == 0, result.output
    return result


class TestGenerate:
    def test_writes_data_and_gold(self, runner, workdir):
        generate(runner, workdir)
        assert (workdir / "data.csv").exists()
        assert (workdir / "gold.csv").read_text().startswith("idA,idB,verdict")

    def test_invalid_spec_is_config_error(self, runner, workdir):
        result = runner.invoke(main, [
            "generate", "--entities", "2", "--duplicates", "5",
            "--out", str(workdir / "d.csv"), "--gold-out", str(workdir / "g.csv"),
        ])
        assert result.exit_code == EXIT_CONFIG

    def test_deterministic_for_seed(self, runner, tmp_path):
        for sub in ("a", "b"):
            d = tmp_path / sub
            d.mkdir()
            result = runner.invoke(main, [
                "generate", "--entities", "40", "--duplicates", "4", "--seed", "9",
                "--out", str(d / "data.csv"), "--gold-out", str(d / "gold.csv"),
            ])
            assert result.exit_code == 0
        assert (tmp_path / "a/data.csv").read_bytes() == (tmp_path / "b/data.csv").read_bytes()


class TestRun:
    def test_run_and_report(self, runner, workdir):
        generate(runner, workdir)
        run_pipeline(runner, workdir, ["--report-out", str(workdir / "report.json")])
        report = json.loads((workdir / "report.json").read_text())
        assert report["acceptedCount"] >= 1
        lines = (workdir / "results.jsonl").read_text().splitlines()
        assert len(lines) >= report["acceptedCount"]

    def test_missing_config_file(self, runner, workdir):
        result = runner.invoke(main, [
            "run", "--config", str(workdir / "absent.yaml"),
            "--out", str(workdir / "r.jsonl"),
        ])
        assert result.exit_code != 0

    def test_malformed_config_exit_code(self, runner, workdir):
        (workdir / "bad.yaml").write_text("threshold: 0.9\n")
        generate(runner, workdir)
        result = runner.invoke(main, [
            "run", "--config", str(workdir / "bad.yaml"),
            "--input", str(workdir / "data.csv"),
            "--out", str(workdir / "r.jsonl"),
        ])
        assert result.exit_code == EXIT_CONFIG

    def test_no_input_given(self, runner, workdir):
        result = runner.invoke(main, [
            "run", "--config", str(workdir / "run.yaml"),
            "--out", str(workdir / "r.jsonl"),
        ])
        assert result.exit_code == EXIT_CONFIG


class TestEvaluateAndSweep:
    def test_evaluate_prints_table(self, runner, workdir):
        generate(runner, workdir)
        run_pipeline(runner, workdir)
        result = runner.invoke(main, [
            "evaluate", "--results", str(workdir / "results.jsonl"),
            "--gold", str(workdir / "gold.csv"), "--closed-world",
        ])
        assert result.exit_code == 0, result.output
        assert "F1=" in result.output

    def test_sweep_one_row_per_threshold(self, runner, workdir):
        generate(runner, workdir)
        run_pipeline(runner, workdir, ["--min-sim", "0.5"])
        result = runner.invoke(main, [
            "sweep", "--results", str(workdir / "results.jsonl"),
            "--gold", str(workdir / "gold.csv"),
            "--thresholds", "0.5,0.8,0.9,1.0",
        ])
        assert result.exit_code == 0, result.output
        assert len([l for l in result.output.splitlines() if l.strip().startswith("t=")]) == 4

    def test_bad_gold_file_is_data_error(self, runner, workdir):
        generate(runner, workdir)
        run_pipeline(runner, workdir)
        (workdir / "bad-gold.csv").write_text("not,a,gold,file\n")
        result = runner.invoke(main, [
            "evaluate", "--results", str(workdir / "results.jsonl"),
            "--gold", str(workdir / "bad-gold.csv"),
        ])
        assert result.exit_code == EXIT_DATA


class TestLearn:
    def test_learn_writes_usable_config(self, runner, workdir):
        generate(runner, workdir, entities=60, duplicates=6)
        result = runner.invoke(main, [
            "learn", "--config", str(workdir / "run.yaml"),
            "--input", str(workdir / "data.csv"),
            "--gold", str(workdir / "gold.csv"),
            "--generations", "2", "--population", "4", "--seed", "1",
            "--out", str(workdir / "learned.yaml"),
        ])
        assert result.exit_code == 0, result.output
        doc = yaml.safe_load((workdir / "learned.yaml").read_text())
        assert "compare" in doc and "threshold" in doc
        # the learned config must itself drive a run
        run = runner.invoke(main, [
            "run", "--config", str(workdir / "learned.yaml"),
            "--input", str(workdir / "data.csv"),
            "--out", str(workdir / "r2.jsonl"),
        ])
        assert run.exit_code == 0, run.output


class TestFuse:
    def test_fuse_reduces_entity_count(self, runner, workdir):
        generate(runner, workdir)
        run_pipeline(runner, workdir)
        result = runner.invoke(main, [
            "fuse", "--config", str(workdir / "run.yaml"),
            "--input", str(workdir / "data.csv"),
            "--results", str(workdir / "results.jsonl"),
            "--gold", str(workdir / "gold.csv"),
            "--out", str(workdir / "fused.csv"),
            "--decision-log", str(workdir / "decisions.jsonl"),
        ])
        assert result.exit_code == 0, result.output
        fused_rows = (workdir / "fused.csv").read_text().count("\n") - 1
        data_rows = (workdir / "data.csv").read_text().count("\n") - 1
        assert fused_rows < data_rows
        log_lines = (workdir / "decisions.jsonl").read_text().splitlines()
        assert log_lines
        first = json.loads(log_lines[0])
        assert {"fusedId", "property", "function", "rationale"} <= set(first)


class TestLabel:
    def test_interactive_labeling_appends_gold(self, runner, workdir):
        generate(runner, workdir)
        run_pipeline(runner, workdir)
        gold_path = workdir / "new-gold.csv"
        result = runner.invoke(main, [
            "label", "--results", str(workdir / "results.jsonl"),
            "--gold", str(gold_path), "--limit", "3",
        ], input="y\nn\nq\n")
        assert result.exit_code == 0, result.output
        text = gold_path.read_text()
        assert text.count("same") == 1
        assert text.count("different") == 1

    def test_nothing_to_label(self, runner, workdir):
        generate(runner, workdir)
        run_pipeline(runner, workdir)
        result = runner.invoke(main, [
            "label", "--results", str(workdir / "results.jsonl"),
            "--gold", str(workdir / "gold.csv"), "--limit", "0",
        ])
        assert result.exit_code == 0
        assert "nothing to label" in result.output
