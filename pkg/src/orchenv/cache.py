"""Deterministic response store: the call->observation cache and its index.

The store is build-then-freeze: single-writer while entries stream in,
immutable afterwards, so any number of episodes can read it concurrently.
Snapshots are line-delimited JSON sorted by entry id, which makes two
builds with the same seed byte-comparable with a file digest.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Protocol

from .canon import canonical_key, canonical_value, derive_seed
from .errors import ClosureError, ConflictError, PathNotFound, SchemaError, UpstreamError
from .model import Observation, ToolCall, Value
from .paths import extract, parse_path
from .templates import WorkflowTemplate


@dataclass(frozen=True)
class CacheEntry:
    id: int
    key: str
    call: ToolCall
    observation: Observation


class CacheStore:
    """Hash-indexed store of (call, observation) pairs with O(1) lookup."""

    def __init__(self):
        self._by_id: dict[int, CacheEntry] = {}
        self._by_key: dict[str, int] = {}
        self._ids_by_function: dict[str, list[int]] = {}
        self._next_id = 0
        self._frozen = False

    def __len__(self) -> int:
        return len(self._by_id)

    def freeze(self) -> "CacheStore":
        self._frozen = True
        return self

    def insert(self, call: ToolCall, observation: Observation) -> tuple[CacheEntry, bool]:
        """Add one pair; returns (entry, created).

        An identical duplicate is deduplicated onto the existing entry; a
        key collision with a different observation is a determinism bug
        and raises ConflictError.
        """
        if self._frozen:
            raise RuntimeError("store is frozen; expansion must target a fresh store")
        if observation.is_error:
            raise ValueError("only successful observations are cached")
        key = canonical_key(call)
        existing_id = self._by_key.get(key)
        if existing_id is not None:
            existing = self._by_id[existing_id]
            if canonical_value(existing.observation.to_doc()) != canonical_value(
                observation.to_doc()
            ):
                raise ConflictError(key, existing_id, self._next_id)
            return existing, False
        entry = CacheEntry(id=self._next_id, key=key, call=call, observation=observation)
        self._by_id[entry.id] = entry
        self._by_key[key] = entry.id
        self._ids_by_function.setdefault(call.function, []).append(entry.id)
        self._next_id += 1
        return entry, True

    def _insert_with_id(self, entry_id: int, call: ToolCall, observation: Observation) -> None:
        key = canonical_key(call)
        if entry_id in self._by_id or key in self._by_key:
            raise ConflictError(key, self._by_key.get(key, entry_id), entry_id)
        entry = CacheEntry(id=entry_id, key=key, call=call, observation=observation)
        self._by_id[entry_id] = entry
        self._by_key[key] = entry_id
        self._ids_by_function.setdefault(call.function, []).append(entry_id)
        self._next_id = max(self._next_id, entry_id + 1)

    def lookup(self, key: str) -> Optional[Observation]:
        entry_id = self._by_key.get(key)
        if entry_id is None:
            return None
        return self._by_id[entry_id].observation

    def lookup_call(self, call: ToolCall) -> Optional[Observation]:
        return self.lookup(canonical_key(call))

    def entry(self, entry_id: int) -> CacheEntry:
        return self._by_id[entry_id]

    def entries(self) -> Iterator[CacheEntry]:
        for entry_id in sorted(self._by_id):
            yield self._by_id[entry_id]

    def ids_for_function(self, function: str) -> list[int]:
        return sorted(self._ids_by_function.get(function, ()))

    def functions(self) -> list[str]:
        return sorted(self._ids_by_function)


def build_cache(pairs: Iterable[tuple[ToolCall, Observation]]) -> CacheStore:
    """Build a frozen store from a stream of successful (call, obs) pairs."""
    store = CacheStore()
    for call, observation in pairs:
        store.insert(call, observation)
    return store.freeze()


class InvertedIndex:
    """Three-level postings: (function, param, canonical value) -> sorted ids."""

    def __init__(self):
        self.postings: dict[tuple[str, str, str], list[int]] = {}
        self.by_function: dict[str, list[int]] = {}


def build_index(store: CacheStore) -> InvertedIndex:
    index = InvertedIndex()
    for entry in store.entries():
        fn = entry.call.function
        index.by_function.setdefault(fn, []).append(entry.id)
        for param, value in entry.call.args.items():
            index.postings.setdefault((fn, param, canonical_value(value)), []).append(
                entry.id
            )
    # entries() iterates in id order, so every posting list is already sorted
    return index


def index_query(
    index: InvertedIndex,
    function: str,
    constraints: Iterable[tuple[str, Value]] = (),
) -> list[int]:
    """Ids of entries for ``function`` matching every (param, value) pair.

    The result is sorted ascending so downstream sampling is deterministic.
    """
    constraints = list(constraints)
    if not constraints:
        return list(index.by_function.get(function, ()))
    lists = [
        index.postings.get((function, param, canonical_value(value)), [])
        for param, value in constraints
    ]
    if any(not lst for lst in lists):
        return []
    lists.sort(key=len)
    result = set(lists[0])
    for lst in lists[1:]:
        result.intersection_update(lst)
        if not result:
            return []
    return sorted(result)


# --- snapshots ---------------------------------------------------------------


def save_snapshot(store: CacheStore, path: str | Path) -> None:
    """Write one entry per line, sorted by id; byte-deterministic."""
    with open(path, "w", encoding="utf-8") as fh:
        for entry in store.entries():
            doc = {
                "id": entry.id,
                "call": entry.call.to_doc(),
                "observation": entry.observation.to_doc(),
            }
            fh.write(canonical_value(doc))
            fh.write("\n")


def load_snapshot(path: str | Path) -> CacheStore:
    """Load a snapshot into a frozen store, re-deriving and checking keys."""
    store = CacheStore()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            call = ToolCall.from_doc(doc["call"])
            observation = Observation.from_doc(doc["observation"])
            store._insert_with_id(int(doc["id"]), call, observation)
    return store.freeze()


# --- workflow-aware expansion -------------------------------------------------


class Upstream(Protocol):
    """Source of responses during cache collection.

    ``respond`` must be a pure function of (call, seed) — byte-identical
    observations for identical inputs — and ``sample_args`` supplies
    plausible independent parameters for a function, drawn from ``rng``.
    """

    def respond(self, call: ToolCall, seed: int) -> Observation: ...

    def sample_args(self, function: str, rng: random.Random) -> dict: ...


def expand_workflow(
    template: WorkflowTemplate,
    upstream: Upstream,
    store: CacheStore,
    breadth: int,
    seed: int,
) -> list[CacheEntry]:
    """Execute the template's full chain ``breadth`` times into the store.

    Independent parameters come from the upstream's sampler; dependent
    parameters are extracted from the observation just obtained, exactly
    as replay will extract them later. Storing every link of every chain
    is what gives the finished cache its closure property.
    """
    created: list[CacheEntry] = []
    for b in range(breadth):
        rng = random.Random(derive_seed("expand", seed, template.id, b))
        chain_obs: list[Observation] = []
        for t, function in enumerate(template.pattern):
            args = upstream.sample_args(function, rng)
            deps = template.dependencies.get(t)
            if deps:
                for pname in sorted(deps.dependency_args):
                    binding = deps.dependency_args[pname]
                    try:
                        args[pname] = extract(
                            parse_path(binding.from_field), chain_obs[binding.from_step]
                        )
                    except PathNotFound as exc:
                        raise ClosureError(
                            f"template {template.id} step {t}: cannot bind {pname!r} "
                            f"from step {binding.from_step}: {exc}"
                        ) from exc
            call = ToolCall(function, args)
            try:
                observation = upstream.respond(call, seed)
            except UpstreamError as exc:
                if exc.step_index is None:
                    exc.step_index = t
                raise
            entry, was_created = store.insert(call, observation)
            if was_created:
                created.append(entry)
            chain_obs.append(observation)
    return created
