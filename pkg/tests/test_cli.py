"""End-to-end tests for the command-line interface."""

import pytest

from meta_ssm import runner as runner_module
from meta_ssm.cli import main
from meta_ssm.config import GridSpec
from meta_ssm.data import load_checkpoint, load_dataset
from meta_ssm.evaluation import read_report_csv, read_trace_csv


@pytest.fixture(name="run_dir")
def run_dir_fixture(tmp_path):
    """Output directory of the tiny experiment."""
    return tmp_path / "run"


@pytest.fixture(name="cli")
def cli_fixture(config_builder, tmp_path):
    """Invoke a subcommand with the tiny config file."""
    config_path = config_builder.write(tmp_path / "config.yaml")

    def invoke(command, *args):
        return main([command, "--config", str(config_path), *args])

    return invoke


@pytest.fixture(name="generated")
def generated_fixture(cli, run_dir):
    """Run directory with a generated dataset."""
    assert cli("generate") == 0
    return run_dir


class TestGenerate:
    """Test source data generation."""

    def test_writes_dataset_and_config(self, cli, run_dir, capsys):
        """Test the dataset and the resolved config are written."""
        assert cli("generate") == 0

        assert (run_dir / "dataset.nssd").is_file()
        assert (run_dir / "config.yaml").is_file()
        assert not (run_dir / "dataset.csv").exists()
        assert len(load_dataset(run_dir / "dataset.nssd").dataset) == 4
        assert "Wrote 4 systems" in capsys.readouterr().out

    def test_n_systems_flag(self, cli, run_dir):
        """Test the flag overrides the config file."""
        assert cli("generate", "--n-systems", "3", "--csv") == 0

        assert len(load_dataset(run_dir / "dataset.nssd").dataset) == 3
        assert (run_dir / "dataset.csv").is_file()

    def test_output_dir_flag(self, cli, tmp_path):
        """Test --output-dir relocates every artifact."""
        assert cli("generate", "--output-dir", str(tmp_path / "other")) == 0

        assert (tmp_path / "other" / "dataset.nssd").is_file()

    def test_invalid_size(self, cli, run_dir):
        """Test an invalid system count exits with 2 and writes nothing."""
        assert cli("generate", "--n-systems", "0") == 2
        assert not (run_dir / "dataset.nssd").exists()

    def test_bad_override(self, cli):
        """Test a malformed --set exits with 2."""
        assert cli("generate", "--set", "n_systems=3") == 2

    def test_missing_config_file(self, tmp_path):
        """Test an absent config file is a runtime failure."""
        assert main(["generate", "--config", str(tmp_path / "missing.yaml")]) == 3


class TestTrain:
    """Test method training."""

    def test_maml(self, cli, generated):
        """Test meta-training writes a checkpoint and a full trace."""
        assert cli("train", "--method", "maml") == 0

        checkpoint = load_checkpoint(generated / "maml" / "checkpoint.nssm")
        assert checkpoint.method == "maml"
        assert checkpoint.iteration == 2
        assert [row["iteration"] for row in read_trace_csv(generated / "maml" / "trace.csv")] == [
            1,
            2,
        ]
        assert (generated / "maml" / "config.yaml").is_file()

    def test_repeat_run_matches_except_wall_time(self, cli, tmp_path):
        """Test a repeated run rewrites identical bytes; only trace timings differ."""
        runs = [tmp_path / "first", tmp_path / "second"]
        for run in runs:
            assert cli("generate", "--output-dir", str(run)) == 0
            assert cli("train", "--method", "maml", "--output-dir", str(run)) == 0

        first, second = runs
        for name in ("dataset.nssd", "maml/checkpoint.nssm"):
            assert (first / name).read_bytes() == (second / name).read_bytes()
        traces = [read_trace_csv(run / "maml" / "trace.csv") for run in runs]
        assert [(r["iteration"], r["outer_loss"]) for r in traces[0]] == [
            (r["iteration"], r["outer_loss"]) for r in traces[1]
        ]

    def test_resume_extends_trace(self, cli, generated):
        """Test resuming continues from the stored iteration."""
        assert cli("train", "--method", "maml") == 0
        assert cli("train", "--method", "maml", "--resume", "--iterations", "3") == 0

        trace = read_trace_csv(generated / "maml" / "trace.csv")
        assert [row["iteration"] for row in trace] == [1, 2, 3]
        assert load_checkpoint(generated / "maml" / "checkpoint.nssm").iteration == 3

    @pytest.mark.parametrize("method", ["ssm", "all-noadapt", "xfer"])
    def test_baselines(self, cli, generated, method):
        """Test every baseline trains and stores its method name."""
        assert cli("train", "--method", method) == 0

        assert load_checkpoint(generated / method / "checkpoint.nssm").method == method
        assert read_trace_csv(generated / method / "trace.csv")

    def test_ssm_needs_no_dataset(self, cli, run_dir):
        """Test ssm trains on the query context alone."""
        assert cli("train", "--method", "ssm") == 0
        assert (run_dir / "ssm" / "checkpoint.nssm").is_file()

    def test_missing_dataset(self, cli):
        """Test meta-training without a dataset exits with 3."""
        assert cli("train", "--method", "maml") == 3

    def test_resume_baseline(self, cli, generated):
        """Test resume is rejected for baselines."""
        assert cli("train", "--method", "xfer", "--resume") == 2

    def test_batch_larger_than_source(self, cli, generated):
        """Test an oversized meta batch is a validation error."""
        assert cli("train", "--method", "maml", "--set", "meta.batch_size=9") == 2


class TestAdapt:
    """Test query adaptation."""

    def test_adapt_meta_checkpoint(self, cli, generated, capsys):
        """Test adaptation writes the adapted checkpoint next to the original."""
        assert cli("train", "--method", "maml") == 0
        assert (
            cli("adapt", "--checkpoint", str(generated / "maml" / "checkpoint.nssm"), "--steps", "2")
            == 0
        )

        adapted = load_checkpoint(generated / "maml" / "adapted.nssm")
        assert adapted.method == "maml"
        assert "Adapted MAML-SSM for 2 steps" in capsys.readouterr().out

    def test_non_adapting_copy(self, cli, run_dir, capsys):
        """Test a non-adapting method is copied unchanged."""
        assert cli("train", "--method", "ssm") == 0
        assert cli("adapt", "--checkpoint", str(run_dir / "ssm" / "checkpoint.nssm")) == 0

        assert (run_dir / "ssm" / "adapted.nssm").is_file()
        assert "does not adapt" in capsys.readouterr().out

    def test_missing_checkpoint(self, cli, tmp_path):
        """Test a missing checkpoint exits with 3."""
        assert cli("adapt", "--checkpoint", str(tmp_path / "none.nssm")) == 3


@pytest.mark.slow
class TestEvaluate:
    """Test the evaluation modes and report rendering."""

    @pytest.fixture(name="trained")
    def trained_fixture(self, cli, generated):
        """Run directory with maml and ssm checkpoints."""
        assert cli("train", "--method", "maml") == 0
        assert cli("train", "--method", "ssm") == 0
        return generated

    def test_fig3(self, cli, trained, capsys):
        """Test the long-horizon comparison writes curves and reports."""
        assert cli("evaluate", "--mode", "fig3", "--methods", "maml", "ssm") == 0

        directory = trained / "fig3"
        for name in ("sse_curves.csv", "predictions.csv", "report.csv", "report.txt"):
            assert (directory / name).is_file()
        output = capsys.readouterr().out
        assert "MAML-SSM" in output
        assert "Reports written to" in output

    def test_table1_and_report(self, cli, trained, tmp_path):
        """Test the grid report and its re-rendering."""
        assert cli("evaluate", "--mode", "table1") == 0

        report_path = trained / "table1" / "report.csv"
        report = read_report_csv(report_path)
        assert {cell.method for cell in report.cells} == {"maml", "ssm"}

        rendered = tmp_path / "rendered" / "table.txt"
        assert main(["report", "--report", str(report_path), "--out", str(rendered)]) == 0
        assert "MAML-SSM" in rendered.read_text(encoding="utf-8")

    def test_explicit_checkpoint(self, cli, trained):
        """Test METHOD=PATH selects a checkpoint file."""
        path = trained / "maml" / "checkpoint.nssm"
        assert (
            cli("evaluate", "--methods", "maml", "--checkpoint", f"maml={path}") == 0
        )

    def test_mismatched_checkpoint(self, cli, trained):
        """Test a checkpoint trained as another method is rejected."""
        path = trained / "ssm" / "checkpoint.nssm"
        assert cli("evaluate", "--methods", "maml", "--checkpoint", f"maml={path}") == 2


class TestEvaluateValidation:
    """Test evaluation arguments rejected before any work."""

    def test_empty_methods(self, cli):
        """Test an empty method list exits with 2."""
        assert cli("evaluate", "--methods") == 2

    def test_unknown_method(self, cli):
        """Test an unknown method exits with 2."""
        assert cli("evaluate", "--mode", "table1", "--methods", "reptile") == 2

    @pytest.mark.parametrize("value", ["maml", "bogus=/tmp/x.nssm", "maml="])
    def test_bad_checkpoint_format(self, cli, value):
        """Test malformed METHOD=PATH values exit with 2."""
        assert cli("evaluate", "--checkpoint", value) == 2

    def test_missing_checkpoints(self, cli):
        """Test evaluating untrained methods exits with 3."""
        assert cli("evaluate", "--methods", "maml") == 3


class TestGridRefits:
    """Test query-fitted baselines are refitted inside the grid."""

    def test_ssm_refitted_per_query(self, config_builder, run_dir, monkeypatch):
        """Test table1 trains ssm once per (context size, query run)."""
        runner = runner_module.ExperimentRunner(config_builder.build(), run_dir)
        runner.train("ssm")
        fitted = []
        original = runner_module.train_query_only

        def counting(context, *args):
            fitted.append(len(context))
            return original(context, *args)

        monkeypatch.setattr(runner_module, "train_query_only", counting)
        grid = GridSpec(
            context_sizes=(6, 8), adaptation_steps=(0, 1), methods=("ssm",), query_runs=2
        )
        report, _ = runner.evaluate_table1(grid)

        assert sorted(fitted) == [6, 6, 8, 8]
        assert [len(cell.sses) for cell in report.cells] == [2, 2, 2, 2]
