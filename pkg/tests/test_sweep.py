import pytest

import smi_couplings.stats
import smi_couplings.sweep


def squares(chunk):
    return [x * x for x in chunk]


@pytest.mark.parametrize("jobs", [1, 2, 5])
def test_results_come_back_in_chunk_order(jobs):
    results = smi_couplings.sweep.run_chunks(squares, list(range(100)), jobs, chunk_size=7)
    assert [x for chunk in results for x in chunk] == [x * x for x in range(100)]


def test_parallel_matches_serial():
    serial = smi_couplings.sweep.run_chunks(squares, list(range(50)), 1, chunk_size=4)
    parallel = smi_couplings.sweep.run_chunks(squares, list(range(50)), 4, chunk_size=4)
    assert serial == parallel


def test_chunked():
    assert smi_couplings.sweep.chunked([1, 2, 3, 4, 5], 2) == [[1, 2], [3, 4], [5]]
    assert smi_couplings.sweep.chunked([], 2) == []


def test_stats_are_shared_across_workers():
    stats = smi_couplings.stats.SweepStats()

    def work(chunk):
        for x in chunk:
            stats.add_checks()
            stats.tally_case("even" if x % 2 == 0 else "odd")
            if x % 10 == 0:
                stats.increment_violations()

    smi_couplings.sweep.run_chunks(work, list(range(40)), 3, chunk_size=5, stats=stats)
    assert stats.checks == 40
    assert stats.violations == 4
    assert stats.chunks_done == 8
    assert stats.cases == {"even": 20, "odd": 20}
    assert stats.summary["checks"] == 40


def test_worker_errors_are_raised():
    def work(chunk):
        if 13 in chunk:
            raise ValueError("thirteen")
        return len(chunk)

    with pytest.raises(ValueError):
        smi_couplings.sweep.run_chunks(work, list(range(30)), 3, chunk_size=4)
