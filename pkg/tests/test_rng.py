import numpy as np

from localize import rng


def test_streams_are_keyed():
    a = rng.stream(7, 0).random(5)
    assert np.array_equal(a, rng.stream(7, 0).random(5))
    assert not np.array_equal(a, rng.stream(7, 1).random(5))
    assert not np.array_equal(a, rng.stream(8, 0).random(5))


def test_shard_sizes():
    assert rng.shard_sizes(10, 4) == [4, 4, 2]
    assert rng.shard_sizes(8, 4) == [4, 4]
    assert sum(rng.shard_sizes(1_000_001)) == 1_000_001


def test_max_threads_env(monkeypatch):
    monkeypatch.setenv("LOCALIZE_THREADS", "3")
    assert rng.max_threads() == 3
    monkeypatch.setenv("LOCALIZE_THREADS", "0")
    assert rng.max_threads() == 1
    monkeypatch.setenv("LOCALIZE_THREADS", "many")
    assert rng.max_threads() >= 1


def test_map_shards_independent_of_threads(monkeypatch):
    fn = lambda g, size: float(g.standard_normal(size).sum())
    monkeypatch.setenv("LOCALIZE_THREADS", "1")
    serial = rng.map_shards(fn, 5, 600_000)
    monkeypatch.setenv("LOCALIZE_THREADS", "4")
    parallel = rng.map_shards(fn, 5, 600_000)
    assert serial == parallel
    assert len(serial) == len(rng.shard_sizes(600_000))
