"""Tests for worker-pool and performance utilities."""

import threading

import pytest

from meta_ssm.utils import (
    get_performance_metrics,
    ordered_map,
    performance_monitor,
    reset_performance_metrics,
)


class TestOrderedMap:
    """Test ordered parallel mapping."""

    def test_serial(self):
        """Test a single worker maps on the calling thread."""
        caller = threading.get_ident()
        threads = []

        def record(item):
            threads.append(threading.get_ident())
            return item * 2

        assert ordered_map(record, [1, 2, 3], workers=1) == [2, 4, 6]
        assert set(threads) == {caller}

    @pytest.mark.parametrize("workers", [2, 3, 8])
    def test_order_kept(self, workers):
        """Test results follow input order for any worker count."""
        items = list(range(20))

        assert ordered_map(lambda x: x * x, items, workers=workers) == [x * x for x in items]

    def test_batched(self):
        """Test max_concurrent batching still returns every result in order."""
        items = list(range(7))

        assert ordered_map(str, items, workers=3, max_concurrent=2) == [str(x) for x in items]

    def test_empty(self):
        """Test an empty input gives an empty result."""
        assert ordered_map(str, [], workers=4) == []

    def test_generator_input(self):
        """Test any iterable is accepted."""
        assert ordered_map(abs, (x for x in (-1, -2)), workers=2) == [1, 2]

    def test_error_propagates(self):
        """Test a failing item raises from the map."""

        def fail(item):
            if item == 2:
                raise ValueError("bad item")
            return item

        with pytest.raises(ValueError, match="bad item"):
            ordered_map(fail, [1, 2, 3], workers=2)


class TestPerformanceMonitor:
    """Test the stage timing decorator."""

    def test_counts_success(self):
        """Test a successful call is counted."""

        @performance_monitor("stage")
        def stage(value):
            return value + 1

        assert stage(1) == 2
        metrics = get_performance_metrics()
        assert metrics["total_operations"] == 1
        assert metrics["total_errors"] == 0
        assert metrics["error_rate"] == 0

    def test_counts_failure(self):
        """Test a failing call is counted and re-raised."""

        @performance_monitor()
        def stage():
            raise RuntimeError("stage broke")

        with pytest.raises(RuntimeError):
            stage()

        metrics = get_performance_metrics()
        assert metrics["total_operations"] == 1
        assert metrics["total_errors"] == 1
        assert metrics["error_rate"] == 100.0

    def test_preserves_metadata(self):
        """Test the wrapped name survives decoration."""

        @performance_monitor()
        def train_stage():
            """Train."""

        assert train_stage.__name__ == "train_stage"

    def test_metric_keys(self):
        """Test the reported metric fields."""
        assert set(get_performance_metrics()) == {
            "total_operations",
            "total_errors",
            "average_duration",
            "total_duration",
            "error_rate",
            "uptime_seconds",
        }

    def test_reset(self):
        """Test reset clears counters."""

        @performance_monitor()
        def stage():
            return None

        stage()
        reset_performance_metrics()

        metrics = get_performance_metrics()
        assert metrics["total_operations"] == 0
        assert metrics["average_duration"] == 0.0
