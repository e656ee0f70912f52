"""Reduced-scale experiments checking how the methods rank against each other.

These train every method from scratch on 32 source systems and take several
minutes each; they are deselected unless run with ``-m slow``.
"""

import pytest

from meta_ssm.config import ExperimentConfig, GridSpec
from meta_ssm.runner import ExperimentRunner

REDUCED_DOCUMENT = {
    "data": {
        "n_systems": 32,
        "theta_range": [0.5, 2.0],
        "t_final_range": [10.0, 40.0],
        "dt": 0.01,
        "seed": 0,
    },
    "query": {
        "theta": 1.572,
        "x0": [1.0, -0.5],
        "t_final": 20.0,
        "context_points": 400,
        "horizon": 500,
        "adaptation_steps": 40,
    },
    "architecture": {
        "history_length": 10,
        "horizon": 5,
        "output_dim": 2,
        "latent_dim": 32,
        "hidden_widths": [32, 32, 32, 32, 32],
    },
    "meta": {
        "inner_rate": 0.01,
        "outer_rate": 0.001,
        "inner_steps": 5,
        "batch_size": 8,
        "outer_iterations": 500,
        "gradient_order": "second",
        "optimizer": "adam",
        "checkpoint_interval": 100,
    },
    "baseline": {"learning_rate": 0.001, "optimizer": "adam"},
}

QUERY_RUNS = 10


def medians_by_steps(report, method):
    """Median SSE of `method` keyed by adaptation steps."""
    return {c.adapt_steps: c.median for c in report.cells if c.method == method}


@pytest.fixture(name="reduced_runner", scope="module")
def reduced_runner_fixture(tmp_path_factory):
    """Runner over a freshly generated reduced-scale source family."""
    runner = ExperimentRunner(
        ExperimentConfig.from_dict(REDUCED_DOCUMENT),
        tmp_path_factory.mktemp("reduced"),
    )
    runner.generate()
    return runner


@pytest.mark.slow
class TestReducedScale:
    """Test the method ordering at reduced scale."""

    def test_maml_beats_all_noadapt(self, reduced_runner):
        """Test adapted maml has a lower median SSE than all-noadapt and adaptation helps."""
        for method in ("maml", "all-noadapt"):
            reduced_runner.train(method)
        grid = GridSpec(
            context_sizes=(400,),
            adaptation_steps=(40,),
            methods=("maml", "all-noadapt"),
            query_runs=QUERY_RUNS,
        )
        report, _ = reduced_runner.evaluate_table1(grid)

        assert [(c.method, c.context_size, c.adapt_steps) for c in report.cells] == [
            ("maml", 400, 40),
            ("all-noadapt", 400, 40),
        ]
        assert all(len(c.sses) == QUERY_RUNS for c in report.cells)
        assert (
            medians_by_steps(report, "maml")[40]
            < medians_by_steps(report, "all-noadapt")[40]
        )

        _, adapted, _ = reduced_runner.adapt(reduced_runner.checkpoint_path("maml"), 40)
        assert adapted.losses[-1] < adapted.losses[0]

    def test_anil_not_worse_than_anil_r(self, reduced_runner):
        """Test the encoder-adapting variant matches or beats the head-adapting one."""
        for method in ("anil", "anil-r"):
            reduced_runner.train(method)
        grid = GridSpec(
            context_sizes=(400,),
            adaptation_steps=(10, 40, 100),
            methods=("anil", "anil-r"),
            query_runs=QUERY_RUNS,
        )
        report, directory = reduced_runner.evaluate_table1(grid)

        anil = medians_by_steps(report, "anil")
        anil_r = medians_by_steps(report, "anil-r")
        assert set(anil) == set(anil_r) == {10, 40, 100}
        for steps in (10, 40, 100):
            assert anil[steps] <= anil_r[steps]
        assert (directory / "report.csv").is_file()
