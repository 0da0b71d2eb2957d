from __future__ import annotations

import pytest

from orchenv import fixtures
from orchenv.builtin import builtin_templates
from orchenv.cache import build_index
from orchenv.upstream import MockUpstream, build_mock_cache


@pytest.fixture(scope="session")
def mock_upstream():
    return MockUpstream()


@pytest.fixture(scope="session")
def mock_registry(mock_upstream):
    return mock_upstream.registry()


@pytest.fixture(scope="session")
def templates():
    return builtin_templates()


@pytest.fixture(scope="session")
def templates_by_id(templates):
    return {t.id: t for t in templates}


@pytest.fixture(scope="session")
def small_store(templates):
    return build_mock_cache(templates, breadth=8, seed=101)


@pytest.fixture(scope="session")
def small_index(small_store):
    return build_index(small_store)


@pytest.fixture(scope="session")
def car_rental():
    return fixtures.car_rental_example()


@pytest.fixture(scope="session")
def city_break():
    return fixtures.city_break_example()
