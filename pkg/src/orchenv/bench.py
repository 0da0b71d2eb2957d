"""Throughput measurement for cache lookups and reward evaluation."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

from .cache import CacheStore, build_index
from .model import Registry
from .rewards import score_total
from .synth import FallbackGenerator, synthesize_dataset
from .templates import WorkflowTemplate, dependency_edges
from .upstream import MockUpstream, build_mock_cache


@dataclass(frozen=True)
class BenchResult:
    operations: int
    seconds: float

    @property
    def per_sec(self) -> float:
        return self.operations / self.seconds if self.seconds > 0 else float("inf")


def build_benchmark_store(
    templates: list[WorkflowTemplate], target_entries: int = 100_000, seed: int = 0
) -> CacheStore:
    """Expand templates until the store holds at least ``target_entries``.

    Sampling collisions deduplicate (location lookups draw from bounded
    pools), so the first pass over-provisions slightly; if it still lands
    short, it rebuilds at a wider breadth. Every pass keeps the same seed
    so identical calls always carry identical observations.
    """
    steps_per_pass = sum(len(t.pattern) for t in templates)
    breadth = max(1, (target_entries * 21) // (steps_per_pass * 20))
    store = build_mock_cache(templates, breadth, seed)
    while len(store) < target_entries:
        breadth = (breadth * 13) // 10 + 1
        store = build_mock_cache(templates, breadth, seed)
    return store


def bench_lookups(store: CacheStore, n: int = 200_000, seed: int = 1) -> BenchResult:
    """Time ``n`` lookups of present keys in a fixed random order."""
    rng = random.Random(seed)
    keys = [entry.key for entry in store.entries()]
    probes = [keys[rng.randrange(len(keys))] for _ in range(n)]
    lookup = store.lookup
    start = time.perf_counter()
    for key in probes:
        if lookup(key) is None:
            raise RuntimeError("benchmark key unexpectedly missing")
    return BenchResult(n, time.perf_counter() - start)


def bench_rewards(
    store: CacheStore,
    registry: Registry,
    templates: list[WorkflowTemplate],
    n: int = 10_000,
    seed: int = 2,
) -> BenchResult:
    """Time ``n`` full reward evaluations over synthesized workloads."""
    index = build_index(store)
    samples, _ = synthesize_dataset(
        templates, store, index, FallbackGenerator(), per_template=2, seed=seed,
        registry=registry,
    )
    if not samples:
        raise RuntimeError("benchmark synthesis produced no samples")
    by_id = {t.id: t for t in templates}
    workloads = []
    for sample in samples:
        gt = sample.ground_truth
        pred = gt.flat_calls()
        transcript = list(zip(pred, gt.expected_observations or ()))
        workloads.append((pred, gt, transcript, dependency_edges(by_id[gt.template_id])))
    start = time.perf_counter()
    for i in range(n):
        pred, gt, transcript, graph = workloads[i % len(workloads)]
        score_total(pred, gt, transcript, graph, lam=0.5, registry=registry)
    return BenchResult(n, time.perf_counter() - start)


def run_benchmark(
    store: CacheStore | None = None,
    target_entries: int = 100_000,
    lookups: int = 200_000,
    rewards: int = 10_000,
    seed: int = 0,
) -> dict:
    """Build (or reuse) a store and report both throughput numbers."""
    upstream = MockUpstream()
    registry = upstream.registry()
    from .builtin import builtin_templates

    templates = builtin_templates()
    if store is None:
        store = build_benchmark_store(templates, target_entries, seed)
    lookup_result = bench_lookups(store, lookups, seed + 1)
    reward_result = bench_rewards(store, registry, templates, rewards, seed + 2)
    return {
        "seed": seed,
        "entries": len(store),
        "lookups": lookup_result.operations,
        "lookup_seconds": round(lookup_result.seconds, 4),
        "lookups_per_sec": round(lookup_result.per_sec, 1),
        "reward_evals": reward_result.operations,
        "reward_seconds": round(reward_result.seconds, 4),
        "reward_evals_per_sec": round(reward_result.per_sec, 1),
    }
