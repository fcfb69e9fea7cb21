import threading
import time

import pytest

from sweep.manager import SweepManager
from sweep.registry import SampleCache


def test_results_keep_input_order():
    manager = SweepManager({"sweep": {"workers": 4}})

    def slow_square(x):
        time.sleep(0.001 * (10 - x))
        return x * x

    assert manager.map(slow_square, range(10)) == [x * x for x in range(10)]


def test_work_is_spread_over_threads():
    manager = SweepManager({"sweep": {"workers": 3}})
    names = set()
    lock = threading.Lock()

    def record(x):
        time.sleep(0.01)
        with lock:
            names.add(threading.current_thread().name)
        return x

    manager.map(record, range(6))
    assert len(names) > 1
    assert all(name.startswith("sweep-") for name in names)


def test_lowest_failing_item_is_raised():
    manager = SweepManager({"sweep": {"workers": 2}})

    def check(x):
        if x in (3, 5):
            raise ValueError(f"bad item {x}")
        return x

    with pytest.raises(ValueError, match="bad item 3"):
        manager.map(check, range(8))


def test_single_worker_runs_inline():
    manager = SweepManager({"sweep": {"workers": 1}})
    main = threading.current_thread().name
    assert manager.map(lambda _: threading.current_thread().name, range(3)) == [main] * 3


def test_default_and_clamped_worker_count():
    assert SweepManager().workers == 2
    assert SweepManager({"sweep": {"workers": 0}}).workers == 1


def test_empty_sweep():
    assert SweepManager().map(lambda x: x, []) == []


def test_cache_is_singleton():
    assert SampleCache.get() is SampleCache.get()
    assert SampleCache() is not SampleCache.get()


def test_cache_counts_hits_and_misses(cache):
    calls = []

    def compute():
        calls.append(1)
        return 42.0

    assert cache.get_or_compute(("k", 1), compute) == 42.0
    assert cache.get_or_compute(("k", 1), compute) == 42.0
    assert len(calls) == 1
    assert (cache.hits, cache.misses) == (1, 1)
    assert cache.lookup(("k", 2)) == (False, None)
    cache.register(("k", 2), 7.0)
    assert cache.lookup(("k", 2)) == (True, 7.0)
    assert len(cache) == 2

    cache.clear()
    assert len(cache) == 0
    assert (cache.hits, cache.misses) == (0, 0)


def test_failed_compute_is_not_stored(cache):
    def fail():
        raise RuntimeError("no sample")

    with pytest.raises(RuntimeError):
        cache.get_or_compute("key", fail)
    assert len(cache) == 0


def test_cache_drops_oldest_beyond_capacity():
    cache = SampleCache(max_entries=2)
    for key in "abc":
        cache.register(key, key.upper())
    assert len(cache) == 2
    assert cache.lookup("a") == (False, None)
    assert cache.lookup("c") == (True, "C")
    with pytest.raises(ValueError):
        SampleCache(max_entries=0)
