from __future__ import annotations

import pytest

from orchenv import fixtures
from orchenv.builtin import builtin_templates
from orchenv.cache import build_cache, build_index
from orchenv.datafiles import save_dataset
from orchenv.service import SessionServer
from orchenv.synth import FallbackGenerator, synthesize_dataset
from orchenv.templates import save_registry
from orchenv.upstream import MockUpstream, build_mock_cache


@pytest.fixture(scope="session")
def registry():
    return MockUpstream().registry()


@pytest.fixture(scope="session")
def fixture_world(registry):
    """Server over the two hand-authored bundles (deterministic values)."""
    car = fixtures.car_rental_example()
    city = fixtures.city_break_example()
    store = build_cache(list(car.entries) + list(city.entries))
    templates = {car.template.id: car.template, city.template.id: city.template}
    server = SessionServer(
        store, registry, templates, [car.sample, city.sample], lam=0.5, seed=1
    )
    tcp = server.serve_tcp("127.0.0.1", 0)
    yield {
        "address": tcp.server_address[:2],
        "car": car,
        "city": city,
        "store": store,
        "templates": templates,
        "server": server,
    }
    tcp.shutdown()
    tcp.server_close()


@pytest.fixture(scope="session")
def synth_world(registry):
    """Server over a synthesized dataset on a mock cache (variety for parity)."""
    templates = builtin_templates()
    store = build_mock_cache(templates, breadth=10, seed=2024)
    index = build_index(store)
    samples, _ = synthesize_dataset(
        templates, store, index, FallbackGenerator(), per_template=3, seed=2024,
        registry=registry,
    )
    assert len(samples) >= 30
    by_id = {t.id: t for t in templates}
    server = SessionServer(store, registry, by_id, samples, lam=0.5, seed=2)
    tcp = server.serve_tcp("127.0.0.1", 0)
    yield {
        "address": tcp.server_address[:2],
        "samples": samples,
        "store": store,
        "templates": by_id,
    }
    tcp.shutdown()
    tcp.server_close()


@pytest.fixture(scope="session")
def cli_workspace(tmp_path_factory, registry, fixture_world):
    """On-disk cache/registry/dataset for driving `orchenv serve --stdio`."""
    from orchenv.cache import save_snapshot

    root = tmp_path_factory.mktemp("client-cli")
    save_snapshot(fixture_world["store"], root / "cache.jsonl")
    save_registry(registry, root / "registry.json")
    save_dataset(
        [fixture_world["car"].sample, fixture_world["city"].sample],
        root / "data.jsonl",
    )
    return root
