from __future__ import annotations

import subprocess
import sys

from hypothesis import given, settings
from hypothesis import strategies as st

from orchenv.canon import canonical_key, canonical_value, derive_seed, json_type
from orchenv.model import ToolCall

SCALARS = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(-10**9, 10**9),
    st.floats(allow_nan=False, allow_infinity=False),
    st.text(max_size=20),
)


def test_key_ignores_arg_insertion_order():
    a = ToolCall("Search_Hotels", {"dest_id": "X", "arrival_date": "2024-05-01"})
    b = ToolCall("Search_Hotels", {"arrival_date": "2024-05-01", "dest_id": "X"})
    assert canonical_key(a) == canonical_key(b)


def test_key_stable_across_processes():
    call = ToolCall("Search_Car_Location", {"query": "San Diego Marriott La Jolla"})
    script = (
        "from orchenv.canon import canonical_key\n"
        "from orchenv.model import ToolCall\n"
        "print(canonical_key(ToolCall('Search_Car_Location',"
        " {'query': 'San Diego Marriott La Jolla'})))"
    )
    out = subprocess.run(
        [sys.executable, "-c", script], capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == canonical_key(call)


def test_no_collisions_over_large_distinct_corpus():
    # 100k pairs distinct by construction must hash to 100k distinct keys
    keys = set()
    functions = [f"Fn_{i}" for i in range(10)]
    for i in range(100_000):
        call = ToolCall(functions[i % 10], {"q": i // 10, "page": i % 7})
        keys.add(canonical_key(call))
    assert len(keys) == 100_000


def test_function_name_case_sensitive():
    a = ToolCall("Search_Hotels", {"q": 1})
    b = ToolCall("search_hotels", {"q": 1})
    assert canonical_key(a) != canonical_key(b)


def test_null_and_absent_are_distinct():
    assert canonical_value({"a": None}) != canonical_value({})
    assert canonical_key(ToolCall("F", {"a": None})) != canonical_key(ToolCall("F", {}))


def test_numeric_and_boolean_forms_distinct():
    assert canonical_value(1) != canonical_value(1.0)
    assert canonical_value(True) != canonical_value(1)
    assert canonical_value({"v": 1}) != canonical_value({"v": True})


def test_float_shortest_round_trip_form():
    assert canonical_value(32.87) == "32.87"
    assert canonical_value(-117.22) == "-117.22"
    assert canonical_value(0.1 + 0.2) == "0.30000000000000004"
    assert canonical_value(2.0) == "2.0"


def test_json_type_names():
    assert json_type(None) == "null"
    assert json_type(True) == "boolean"
    assert json_type(3) == "integer"
    assert json_type(3.5) == "float"
    assert json_type("x") == "string"
    assert json_type([1]) == "list"
    assert json_type({"a": 1}) == "map"


@given(st.dictionaries(st.text(min_size=1, max_size=8), SCALARS, max_size=6),
       st.randoms(use_true_random=False))
@settings(max_examples=100)
def test_key_order_independence_property(args, rng):
    items = list(args.items())
    rng.shuffle(items)
    permuted = dict(items)
    assert canonical_key(ToolCall("F", args)) == canonical_key(ToolCall("F", permuted))


def test_derive_seed_is_stable_and_sensitive():
    assert derive_seed("a", 1) == derive_seed("a", 1)
    assert derive_seed("a", 1) != derive_seed("a", 2)
    assert derive_seed("a", 1) != derive_seed("b", 1)
