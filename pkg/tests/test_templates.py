from __future__ import annotations

import json

import pytest

from orchenv.errors import CycleError, PathSyntaxError, SchemaError
from orchenv.templates import (
    dependency_edges,
    parse_registry,
    parse_template,
    save_registry,
    load_registry,
    serialize_template,
    template_to_json,
    topological_order,
    turn_levels,
)


def test_parse_three_step_chain(templates_by_id):
    template = templates_by_id["car_rental_packages"]
    assert template.pattern == (
        "Search_Car_Location", "Search_Car_Rentals", "Get_Packages",
    )
    assert dependency_edges(template) == ((0, 1), (1, 2))
    bindings = [
        (step, name)
        for step in sorted(template.dependencies)
        for name in sorted(template.dependencies[step].dependency_args)
    ]
    assert bindings == [
        (1, "pick_up_latitude"), (1, "pick_up_longitude"),
        (2, "search_key"), (2, "vehicle_id"),
    ]
    binding = template.dependencies[1].dependency_args["pick_up_latitude"]
    assert binding.from_step == 0
    assert binding.from_field == "[0].coordinates.latitude"


def test_single_step_template_has_no_edges():
    template = parse_template({"pattern": ["Ping"], "dependencies": {}}, template_id="t")
    assert dependency_edges(template) == ()
    assert turn_levels(template) == [1]


def test_self_dependency_rejected():
    doc = {
        "pattern": ["A", "B"],
        "dependencies": {
            "1": {"depends_on": [1],
                  "dependency_args": {"x": {"from_step": 1, "from_field": "v"}}}
        },
    }
    with pytest.raises(CycleError):
        parse_template(doc, template_id="t")


def test_backward_dependency_rejected():
    doc = {
        "pattern": ["A", "B", "C"],
        "dependencies": {"1": {"depends_on": [2], "dependency_args": {}}},
    }
    with pytest.raises(CycleError):
        parse_template(doc, template_id="t")


def test_missing_pattern_rejected():
    with pytest.raises(SchemaError):
        parse_template({"dependencies": {}}, template_id="t")
    with pytest.raises(SchemaError):
        parse_template({"pattern": [], "dependencies": {}}, template_id="t")


def test_binding_outside_depends_on_rejected():
    doc = {
        "pattern": ["A", "B", "C"],
        "dependencies": {
            "2": {"depends_on": [1],
                  "dependency_args": {"x": {"from_step": 0, "from_field": "v"}}}
        },
    }
    with pytest.raises(SchemaError):
        parse_template(doc, template_id="t")


def test_bad_from_field_rejected():
    doc = {
        "pattern": ["A", "B"],
        "dependencies": {
            "1": {"depends_on": [0],
                  "dependency_args": {"x": {"from_step": 0, "from_field": "a..b"}}}
        },
    }
    with pytest.raises(PathSyntaxError):
        parse_template(doc, template_id="t")


def test_serialize_parse_round_trip(templates):
    for template in templates:
        doc = serialize_template(template)
        assert parse_template(doc) == template
        assert parse_template(template_to_json(template)) == template


def test_dependency_relation_is_strict_partial_order(templates):
    for template in templates:
        order = topological_order(template)
        assert sorted(order) == list(range(len(template.pattern)))
        position = {step: i for i, step in enumerate(order)}
        for j, i in dependency_edges(template):
            assert position[j] < position[i]


def test_turn_levels_linear_and_parallel(templates_by_id):
    assert turn_levels(templates_by_id["car_rental_packages"]) == [1, 2, 3]
    assert turn_levels(templates_by_id["city_break_parallel"]) == [1, 1, 2, 2]
    assert turn_levels(templates_by_id["car_rental_fanout"]) == [1, 2, 3, 3]


def test_registry_round_trip(tmp_path, mock_registry):
    path = tmp_path / "registry.json"
    save_registry(mock_registry, path)
    loaded = load_registry(path)
    assert loaded == mock_registry


def test_registry_rejects_duplicates(mock_registry):
    docs = [mock_registry["Search_Hotels"].to_doc()] * 2
    with pytest.raises(SchemaError):
        parse_registry(json.dumps(docs))
