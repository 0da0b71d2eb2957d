from __future__ import annotations

import hashlib
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orchenv.cache import (
    CacheStore,
    build_cache,
    build_index,
    index_query,
    load_snapshot,
    save_snapshot,
)
from orchenv.canon import canonical_key, canonical_value
from orchenv.errors import ConflictError
from orchenv.model import Observation, ToolCall
from orchenv.paths import extract, parse_path


def _obs(value) -> Observation:
    return Observation.success({"v": value})


def test_identical_duplicates_deduplicate():
    call = ToolCall("F", {"a": 1})
    store = build_cache([(call, _obs(1)), (call, _obs(1))])
    assert len(store) == 1


def test_conflicting_duplicate_rejected():
    call = ToolCall("F", {"a": 1})
    with pytest.raises(ConflictError):
        build_cache([(call, _obs(1)), (call, _obs(2))])


def test_error_observations_not_cacheable():
    from orchenv.model import ErrorCode

    store = CacheStore()
    with pytest.raises(ValueError):
        store.insert(ToolCall("F", {}), Observation.failure(ErrorCode.CACHE_MISS, "x"))


def test_lookup_hit_and_miss(car_rental):
    store = car_rental.store()
    call_1, obs_1 = car_rental.entries[0]
    found = store.lookup(canonical_key(call_1))
    assert found == obs_1
    coords = extract(parse_path("[0].coordinates"), found)
    assert coords == {"latitude": 32.87, "longitude": -117.22}
    assert store.lookup_call(ToolCall("Search_Car_Location", {"query": "nowhere"})) is None


def test_repeated_lookup_returns_identical_observation(car_rental):
    store = car_rental.store()
    key = canonical_key(car_rental.entries[0][0])
    first = store.lookup(key)
    for _ in range(10_000):
        assert store.lookup(key) is first


def test_frozen_store_rejects_insert(car_rental):
    store = car_rental.store()
    with pytest.raises(RuntimeError):
        store.insert(ToolCall("F", {}), _obs(1))


def _random_store(rng: random.Random, n: int) -> CacheStore:
    store = CacheStore()
    functions = ["Alpha", "Beta", "Gamma"]
    for _ in range(n):
        args = {
            "p": rng.randrange(4),
            "q": rng.choice(["x", "y", "z"]),
        }
        if rng.random() < 0.5:
            args["r"] = rng.randrange(3)
        call = ToolCall(rng.choice(functions), args)
        # observation derived from the call so repeats deduplicate cleanly
        store.insert(call, _obs(canonical_key(call)))
    return store.freeze()


def _scan_query(store: CacheStore, function: str, constraints) -> list[int]:
    hits = []
    for entry in store.entries():
        if entry.call.function != function:
            continue
        if all(
            p in entry.call.args
            and canonical_value(entry.call.args[p]) == canonical_value(v)
            for p, v in constraints
        ):
            hits.append(entry.id)
    return hits


def test_index_matches_linear_scan_on_random_store():
    rng = random.Random(2024)
    store = _random_store(rng, 1000)
    index = build_index(store)
    for _ in range(200):
        function = rng.choice(["Alpha", "Beta", "Gamma"])
        n_constraints = rng.randrange(3)
        constraints = [
            ("p", rng.randrange(4)) if rng.random() < 0.5 else ("q", rng.choice("xyz"))
            for _ in range(n_constraints)
        ]
        assert index_query(index, function, constraints) == _scan_query(
            store, function, constraints
        )


@given(st.integers(0, 2**30), st.integers(10, 120))
@settings(max_examples=30, deadline=None)
def test_index_scan_equivalence_property(seed, size):
    rng = random.Random(seed)
    store = _random_store(rng, size)
    index = build_index(store)
    for function in ("Alpha", "Beta", "Missing"):
        for constraints in ([], [("p", 1)], [("p", 2), ("q", "y")], [("p", 9)]):
            assert index_query(index, function, constraints) == _scan_query(
                store, function, constraints
            )


def test_index_query_shapes(small_store, small_index):
    fn = small_store.functions()[0]
    all_ids = index_query(small_index, fn, [])
    assert all_ids == small_store.ids_for_function(fn)
    assert index_query(small_index, "No_Such_Fn", []) == []
    entry = small_store.entry(all_ids[0])
    param, value = next(iter(entry.call.args.items()))
    single = index_query(small_index, fn, [(param, value)])
    assert single == small_index.postings[(fn, param, canonical_value(value))]
    assert index_query(small_index, fn, [(param, "no-such-value-ever")]) == []


def test_index_ids_sorted_ascending(small_index):
    for ids in small_index.postings.values():
        assert ids == sorted(ids)


def _digest(path) -> str:
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


def test_snapshot_round_trip_bytes(tmp_path, small_store):
    first = tmp_path / "first.jsonl"
    second = tmp_path / "second.jsonl"
    save_snapshot(small_store, first)
    loaded = load_snapshot(first)
    save_snapshot(loaded, second)
    assert _digest(first) == _digest(second)
    assert len(loaded) == len(small_store)
    for entry, reloaded in zip(small_store.entries(), loaded.entries()):
        assert entry.id == reloaded.id
        assert entry.key == reloaded.key
        assert entry.call == reloaded.call
        assert entry.observation == reloaded.observation
