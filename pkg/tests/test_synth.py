from __future__ import annotations

import hashlib
import json
import random
import sys

import pytest

from orchenv.cache import build_index
from orchenv.canon import canonical_value
from orchenv.datafiles import save_dataset
from orchenv.env import Environment, replay_ground_truth
from orchenv.errors import ExhaustedError, GeneratorError
from orchenv.model import Observation, ToolCall
from orchenv.paths import extract, parse_path
from orchenv.synth import (
    FallbackGenerator,
    QueryDraft,
    SubprocessGenerator,
    Trace,
    build_ground_truth,
    build_prompt,
    generate_query,
    sample_trace,
    synthesize_dataset,
    verify_echo_back,
)
from orchenv.templates import parse_template


def test_sample_trace_over_single_chain(car_rental):
    store = car_rental.store()
    index = build_index(store)
    trace = sample_trace(car_rental.template, store, index, random.Random(1))
    assert [c.function for c, _ in trace.steps] == list(car_rental.template.pattern)
    assert [c for c, _ in trace.steps] == [c for c, _ in car_rental.entries]


def test_sample_trace_exhausts_on_impossible_constraint(car_rental):
    # a store holding only the first step leaves later candidate sets empty
    from orchenv.cache import build_cache

    store = build_cache(car_rental.entries[:1])
    index = build_index(store)
    with pytest.raises(ExhaustedError):
        sample_trace(car_rental.template, store, index, random.Random(1),
                     max_restarts=4)


def test_sampled_traces_verify_against_independent_checker(
    templates, small_store, small_index, templates_by_id
):
    # brute-force re-verification of every dependency binding
    produced = 0
    rng = random.Random(512)
    for template in templates:
        for _ in range(8):
            try:
                trace = sample_trace(template, small_store, small_index, rng)
            except ExhaustedError:
                continue
            produced += 1
            for t, deps in template.dependencies.items():
                for pname, binding in deps.dependency_args.items():
                    expected = extract(
                        parse_path(binding.from_field),
                        trace.steps[binding.from_step][1],
                    )
                    actual = trace.steps[t][0].args[pname]
                    assert canonical_value(actual) == canonical_value(expected)
    assert produced >= 100


def test_sample_trace_deterministic(small_store, small_index, templates_by_id):
    template = templates_by_id["hotel_rooms"]
    a = sample_trace(template, small_store, small_index, random.Random(33))
    b = sample_trace(template, small_store, small_index, random.Random(33))
    assert a == b


def test_ground_truth_turn_grouping(city_break):
    store = city_break.store()
    index = build_index(store)
    trace = sample_trace(city_break.template, store, index, random.Random(0))
    gt = build_ground_truth(trace, city_break.template)
    assert [t for t, _ in gt.calls] == [1, 1, 2, 2]
    turns = gt.turns()
    assert {c.function for c in turns[0]} == {
        "Search_Attraction_Location", "Search_Hotel_Destination",
    }


def test_fallback_query_embeds_values(car_rental):
    trace = Trace(steps=car_rental.entries, template_id=car_rental.template.id, seed=0)
    draft = generate_query(trace, car_rental.template, FallbackGenerator())
    assert "San Diego Marriott La Jolla" in draft.query
    assert "2024-10-31" in draft.query
    assert "10:00" in draft.query
    # dependency-derived values stay out of the query text
    assert "637318066" not in draft.query
    again = generate_query(trace, car_rental.template, FallbackGenerator())
    assert draft == again


def test_fallback_on_empty_args_single_step():
    template = parse_template({"pattern": ["Refresh_Session"]}, template_id="one")
    trace = Trace(
        steps=((ToolCall("Refresh_Session", {}), Observation.success({"ok": 1})),),
        template_id="one",
        seed=0,
    )
    draft = generate_query(trace, template, FallbackGenerator())
    assert "refresh session" in draft.query
    assert draft.chosen_parameters == ({},)


def test_prompt_marks_dependency_params(car_rental):
    trace = Trace(steps=car_rental.entries, template_id=car_rental.template.id, seed=0)
    prompt = build_prompt(trace, car_rental.template)
    assert "EXACT PARAMETERS TO USE (do not modify)" in prompt.user
    assert "(Parameters from previous step results)" in prompt.user
    assert prompt.step_params[1].dependency_params.keys() == {
        "pick_up_latitude", "pick_up_longitude",
    }
    assert "pick_up_date" in prompt.step_params[1].query_params


def test_echo_back_accepts_faithful_draft(car_rental):
    trace = Trace(steps=car_rental.entries, template_id=car_rental.template.id, seed=0)
    draft = generate_query(trace, car_rental.template, FallbackGenerator())
    assert verify_echo_back(draft, trace, car_rental.template)


def test_echo_back_rejects_single_value_mutation(car_rental):
    trace = Trace(steps=car_rental.entries, template_id=car_rental.template.id, seed=0)
    draft = generate_query(trace, car_rental.template, FallbackGenerator())
    mutated_steps = [dict(m) for m in draft.chosen_parameters]
    mutated_steps[1]["pick_up_date"] = "2024-11-01"
    mutated = QueryDraft(draft.query, tuple(mutated_steps), draft.variation_notes)
    assert not verify_echo_back(mutated, trace, car_rental.template)


def test_echo_back_mutation_sweep(car_rental):
    trace = Trace(steps=car_rental.entries, template_id=car_rental.template.id, seed=0)
    template = car_rental.template
    base = generate_query(trace, template, FallbackGenerator())
    rng = random.Random(99)
    mutated_count = 0
    for _ in range(50):
        steps = [dict(m) for m in base.chosen_parameters]
        t = rng.randrange(len(steps))
        candidate = steps[t]
        mutate = bool(candidate) and rng.random() < 0.7
        if mutate:
            pname = rng.choice(sorted(candidate))
            value = candidate[pname]
            candidate[pname] = (
                value + "X" if isinstance(value, str) else value + 1
            )
            mutated_count += 1
        draft = QueryDraft(base.query, tuple(steps), base.variation_notes)
        assert verify_echo_back(draft, trace, template) == (not mutate)
    assert mutated_count > 10


def test_echo_back_dependency_params_exempt(car_rental):
    trace = Trace(steps=car_rental.entries, template_id=car_rental.template.id, seed=0)
    echo = tuple(
        {p: v for p, v in call.args.items()} for call, _ in car_rental.entries
    )
    # even a wrong dependency value in the echo is ignored
    mutated = [dict(m) for m in echo]
    mutated[2]["vehicle_id"] = "mangled"
    draft = QueryDraft("q", tuple(mutated), "")
    assert verify_echo_back(draft, trace, car_rental.template)


def test_echo_back_length_mismatch(car_rental):
    trace = Trace(steps=car_rental.entries, template_id=car_rental.template.id, seed=0)
    draft = QueryDraft("q", ({},), "")
    assert not verify_echo_back(draft, trace, car_rental.template)


def test_synthesize_zero_per_template(templates, small_store, small_index):
    samples, report = synthesize_dataset(
        templates, small_store, small_index, FallbackGenerator(),
        per_template=0, seed=5,
    )
    assert samples == [] and report.requested == 0


def test_synthesize_deterministic_files(tmp_path, templates, small_store, small_index,
                                        mock_registry):
    digests = []
    for name in ("a.jsonl", "b.jsonl"):
        samples, _ = synthesize_dataset(
            templates, small_store, small_index, FallbackGenerator(),
            per_template=2, seed=21, registry=mock_registry,
        )
        path = tmp_path / name
        save_dataset(samples, path)
        digests.append(hashlib.sha256(path.read_bytes()).hexdigest())
    assert digests[0] == digests[1]


def test_synthesized_samples_replay_cleanly(templates, small_store, small_index,
                                            mock_registry):
    samples, report = synthesize_dataset(
        templates, small_store, small_index, FallbackGenerator(),
        per_template=2, seed=77, registry=mock_registry,
    )
    assert samples
    env = Environment(small_store, mock_registry)
    for sample in samples:
        episode = replay_ground_truth(env, sample)
        assert not any(obs.is_error for _, obs in episode.transcript)
    assert report.accepted == len(samples)
    assert 0.0 < report.yield_rate <= 1.0


def test_synthesize_propagates_logic_metadata(templates_by_id, small_store,
                                              small_index, mock_registry):
    samples, _ = synthesize_dataset(
        [templates_by_id["city_break_parallel"]], small_store, small_index,
        FallbackGenerator(), per_template=1, seed=3, registry=mock_registry,
    )
    assert samples and samples[0].metadata["logic"] == "parallel_conjunction"


_ECHO_ADAPTER = (
    "import json, sys\n"
    "req = json.load(sys.stdin)\n"
    "steps = req['steps']\n"
    "print(json.dumps({\n"
    "  'query': 'Scripted: ' + ', '.join(s['function'] for s in steps),\n"
    "  'chosen_parameters': [s['query_params'] for s in steps],\n"
    "  'variation_notes': 'adapter'\n"
    "}))\n"
)


def test_subprocess_generator_round_trip(car_rental):
    trace = Trace(steps=car_rental.entries, template_id=car_rental.template.id, seed=0)
    generator = SubprocessGenerator([sys.executable, "-c", _ECHO_ADAPTER])
    draft = generate_query(trace, car_rental.template, generator)
    assert draft.query.startswith("Scripted: Search_Car_Location")
    assert verify_echo_back(draft, trace, car_rental.template)


def test_subprocess_generator_failure(car_rental):
    trace = Trace(steps=car_rental.entries, template_id=car_rental.template.id, seed=0)
    generator = SubprocessGenerator([sys.executable, "-c", "import sys; sys.exit(3)"])
    with pytest.raises(GeneratorError):
        generate_query(trace, car_rental.template, generator)


def test_generator_failures_become_report_entries(templates_by_id, small_store,
                                                  small_index):
    class Broken:
        generator_id = "broken"

        def generate(self, trace, prompt):
            raise GeneratorError("nope")

    samples, report = synthesize_dataset(
        [templates_by_id["hotel_search"]], small_store, small_index, Broken(),
        per_template=2, seed=1,
    )
    assert samples == []
    treport = report.per_template["hotel_search"]
    assert treport.failures["generator_error"] > 0
    assert treport.failures["slot_abandoned"] == 2
