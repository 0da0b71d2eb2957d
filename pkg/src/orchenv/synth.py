"""Constrained data synthesis: trace sampling, query generation, validation.

Traces are sampled step-by-step from the cache along a template's
dependency structure: independent steps draw uniformly from all entries
for their function; dependent steps extract the required values from the
trace so far and intersect inverted-index postings, so every emitted
trace satisfies its dependency bindings by construction. An empty
candidate set restarts sampling from step 1; a bounded number of restarts
abandons the attempt.

Query generation is pluggable. Generators receive the exact parameters
to use and must echo them back alongside the query; the echo is verified
against the trace before a sample is accepted. Every accepted sample is
finally replayed through the execution environment and must produce zero
error observations.
"""

from __future__ import annotations

import json
import random
import subprocess
from dataclasses import dataclass, field
from typing import Mapping, Optional, Protocol, Sequence

from .cache import CacheStore, InvertedIndex, index_query
from .canon import derive_seed, values_equal
from .env import Environment, replay_ground_truth
from .errors import ClosureError, ExhaustedError, GeneratorError, PathNotFound
from .model import (
    DatasetSample,
    GroundTruth,
    Observation,
    Provenance,
    Registry,
    ToolCall,
    Value,
)
from .paths import extract, parse_path
from .templates import WorkflowTemplate, dependency_param_names, turn_levels

DEFAULT_MAX_RESTARTS = 10
DEFAULT_ATTEMPTS_PER_SLOT = 5


@dataclass(frozen=True)
class Trace:
    """A sampled chain of (call, observation) steps from one template."""

    steps: tuple[tuple[ToolCall, Observation], ...]
    template_id: str
    seed: int


@dataclass(frozen=True)
class QueryDraft:
    """Generator output: the query plus an echo of the parameters it encodes."""

    query: str
    chosen_parameters: tuple[Mapping[str, Value], ...]
    variation_notes: str = ""


@dataclass(frozen=True)
class StepParams:
    function: str
    query_params: Mapping[str, Value]
    dependency_params: Mapping[str, Value]


@dataclass(frozen=True)
class Prompt:
    """Generation request: rendered text for LLM adapters plus the same
    information structured, for programmatic generators."""

    system: str
    user: str
    step_params: tuple[StepParams, ...]


class Generator(Protocol):
    def generate(self, trace: Trace, prompt: Prompt) -> QueryDraft: ...


# --- trace sampling -----------------------------------------------------------


def sample_trace(
    template: WorkflowTemplate,
    store: CacheStore,
    index: InvertedIndex,
    rng: random.Random,
    max_restarts: int = DEFAULT_MAX_RESTARTS,
    *,
    seed: int = 0,
) -> Trace:
    """Sample one trace; raises ExhaustedError after too many restarts.

    A PathNotFound against a stored observation means the cache is not
    closure-complete and surfaces as ClosureError (a build bug, not a
    sampling miss).
    """
    restarts_used = 0
    for _ in range(max_restarts + 1):
        steps: list[tuple[ToolCall, Observation]] = []
        failed = False
        for t, function in enumerate(template.pattern):
            deps = template.dependencies.get(t)
            constraints: list[tuple[str, Value]] = []
            if deps and deps.dependency_args:
                for pname in sorted(deps.dependency_args):
                    binding = deps.dependency_args[pname]
                    source_obs = steps[binding.from_step][1]
                    try:
                        value = extract(parse_path(binding.from_field), source_obs)
                    except PathNotFound as exc:
                        raise ClosureError(
                            f"template {template.id} step {t}: {pname!r} "
                            f"unresolvable against stored observation: {exc}"
                        ) from exc
                    constraints.append((pname, value))
            candidates = index_query(index, function, constraints)
            if not candidates:
                failed = True
                break
            entry = store.entry(candidates[rng.randrange(len(candidates))])
            steps.append((entry.call, entry.observation))
        if not failed:
            return Trace(steps=tuple(steps), template_id=template.id, seed=seed)
        restarts_used += 1
    raise ExhaustedError(restarts_used - 1)


def build_ground_truth(
    trace: Trace, template: WorkflowTemplate, include_observations: bool = True
) -> GroundTruth:
    """Group trace steps into turns by dependency level.

    Steps with no ordering constraint between them share a turn; a step
    lands one turn after its deepest prerequisite.
    """
    levels = turn_levels(template)
    return GroundTruth(
        calls=tuple(
            (levels[t], call) for t, (call, _) in enumerate(trace.steps)
        ),
        template_id=template.id,
        expected_observations=(
            tuple(obs for _, obs in trace.steps) if include_observations else None
        ),
    )


# --- query generation ---------------------------------------------------------

GENERATION_SYSTEM_PROMPT = (
    "You are generating natural language queries for a travel booking "
    "assistant. You will be given EXACT API parameter values to use (from a "
    "validated cache). Your task is ONLY to generate a natural language query "
    "that matches these exact parameters. DO NOT modify the parameter values."
)

_USER_TEMPLATE_FOOTER = (
    "Task: Generate a query matching these exact parameters.\n"
    'OUTPUT FORMAT (JSON):\n'
    '{"query": "...", "chosen_parameters": [...],\n'
    ' "variation_notes": "Brief scenario description"}\n'
    "IMPORTANT: Query must match the exact parameters above.\n"
)


def _split_step_params(trace: Trace, template: WorkflowTemplate) -> tuple[StepParams, ...]:
    steps = []
    for t, (call, _) in enumerate(trace.steps):
        dep_names = dependency_param_names(template, t)
        steps.append(
            StepParams(
                function=call.function,
                query_params={p: v for p, v in call.args.items() if p not in dep_names},
                dependency_params={p: v for p, v in call.args.items() if p in dep_names},
            )
        )
    return tuple(steps)


def build_prompt(trace: Trace, template: WorkflowTemplate) -> Prompt:
    step_params = _split_step_params(trace, template)
    lines = [f"Workflow pattern: {list(template.pattern)}",
             "EXACT PARAMETERS TO USE (do not modify):"]
    for t, sp in enumerate(step_params):
        lines.append(f"Step {t} - {sp.function}:")
        for pname, value in sp.query_params.items():
            lines.append(f"  {pname}: '{value}'")
        if sp.dependency_params:
            lines.append("  (Parameters from previous step results)")
            for pname, value in sp.dependency_params.items():
                lines.append(f"  {pname}: '{value}'")
    lines.append("")
    lines.append(_USER_TEMPLATE_FOOTER)
    return Prompt(
        system=GENERATION_SYSTEM_PROMPT,
        user="\n".join(lines),
        step_params=step_params,
    )


def _humanize(function: str) -> str:
    return function.replace("_", " ").lower()


def _format_value(value: Value) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value, sort_keys=True, ensure_ascii=False)


class FallbackGenerator:
    """Deterministic template-stitched generator.

    Produces plain English that embeds every query-derived parameter
    value verbatim; identical traces yield identical drafts.
    """

    generator_id = "fallback"

    def generate(self, trace: Trace, prompt: Prompt) -> QueryDraft:
        fragments = []
        for sp in prompt.step_params:
            rendered = ", ".join(
                f"{pname} {_format_value(value)}"
                for pname, value in sp.query_params.items()
            )
            if rendered:
                fragments.append(f"{_humanize(sp.function)} with {rendered}")
            elif sp.dependency_params:
                fragments.append(f"{_humanize(sp.function)} using the results above")
            else:
                fragments.append(_humanize(sp.function))
        query = "Please handle this booking request: " + "; then ".join(fragments) + "."
        return QueryDraft(
            query=query,
            chosen_parameters=tuple(dict(sp.query_params) for sp in prompt.step_params),
            variation_notes=f"Scripted request covering {len(prompt.step_params)} steps.",
        )


class SubprocessGenerator:
    """Out-of-process adapter: one JSON request in, one JSON draft out.

    The request document carries the rendered prompt and the structured
    per-step parameters; the adapter answers on stdout with a JSON object
    holding ``query``, ``chosen_parameters``, and ``variation_notes``.
    """

    def __init__(self, command: Sequence[str], timeout: float = 120.0):
        self.command = list(command)
        self.timeout = timeout
        self.generator_id = "exec:" + " ".join(self.command)

    def generate(self, trace: Trace, prompt: Prompt) -> QueryDraft:
        request = {
            "system": prompt.system,
            "user": prompt.user,
            "template_id": trace.template_id,
            "steps": [
                {
                    "function": sp.function,
                    "query_params": dict(sp.query_params),
                    "dependency_params": dict(sp.dependency_params),
                }
                for sp in prompt.step_params
            ],
        }
        try:
            proc = subprocess.run(
                self.command,
                input=json.dumps(request),
                capture_output=True,
                text=True,
                timeout=self.timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise GeneratorError(f"generator process failed: {exc}") from exc
        if proc.returncode != 0:
            raise GeneratorError(
                f"generator exited {proc.returncode}: {proc.stderr.strip()[:500]}"
            )
        try:
            doc = json.loads(proc.stdout)
            return QueryDraft(
                query=doc["query"],
                chosen_parameters=tuple(dict(m) for m in doc["chosen_parameters"]),
                variation_notes=str(doc.get("variation_notes", "")),
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise GeneratorError(f"generator output unusable: {exc}") from exc


def generate_query(
    trace: Trace, template: WorkflowTemplate, generator: Generator
) -> QueryDraft:
    return generator.generate(trace, build_prompt(trace, template))


def verify_echo_back(draft: QueryDraft, trace: Trace, template: WorkflowTemplate) -> bool:
    """True iff every query-derived parameter value in the trace appears,
    canonically equal, at the matching step of the draft's echo.

    Dependency-derived parameters are exempt: they come from observations,
    not from the query text.
    """
    if len(draft.chosen_parameters) != len(trace.steps):
        return False
    for t, (call, _) in enumerate(trace.steps):
        dep_names = dependency_param_names(template, t)
        echoed = draft.chosen_parameters[t]
        for pname, value in call.args.items():
            if pname in dep_names:
                continue
            if pname not in echoed or not values_equal(echoed[pname], value):
                return False
    return True


# --- dataset assembly ---------------------------------------------------------


@dataclass
class TemplateReport:
    requested: int = 0
    accepted: int = 0
    failures: dict[str, int] = field(default_factory=dict)

    def record_failure(self, cause: str) -> None:
        self.failures[cause] = self.failures.get(cause, 0) + 1


@dataclass
class SynthesisReport:
    per_template: dict[str, TemplateReport] = field(default_factory=dict)

    @property
    def requested(self) -> int:
        return sum(r.requested for r in self.per_template.values())

    @property
    def accepted(self) -> int:
        return sum(r.accepted for r in self.per_template.values())

    @property
    def yield_rate(self) -> float:
        return self.accepted / self.requested if self.requested else 0.0

    def to_doc(self) -> dict:
        return {
            "requested": self.requested,
            "accepted": self.accepted,
            "yield_rate": self.yield_rate,
            "per_template": {
                tid: {
                    "requested": r.requested,
                    "accepted": r.accepted,
                    "failures": dict(sorted(r.failures.items())),
                }
                for tid, r in sorted(self.per_template.items())
            },
        }


def synthesize_dataset(
    templates: Sequence[WorkflowTemplate],
    store: CacheStore,
    index: InvertedIndex,
    generator: Generator,
    per_template: int,
    seed: int,
    *,
    registry: Optional[Registry] = None,
    max_restarts: int = DEFAULT_MAX_RESTARTS,
    attempts_per_slot: int = DEFAULT_ATTEMPTS_PER_SLOT,
) -> tuple[list[DatasetSample], SynthesisReport]:
    """Run the full pipeline for every (template, slot) pair.

    Each accepted sample has a dependency-consistent trace, a verified
    echo-back, and a clean ground-truth replay through the execution
    environment. Per-sample failures are report entries, never raises.
    Deterministic for fixed (templates, store, seed, generator=fallback).
    """
    generator_id = getattr(generator, "generator_id", type(generator).__name__)
    env = Environment(store, registry)
    samples: list[DatasetSample] = []
    report = SynthesisReport()

    for template in sorted(templates, key=lambda t: t.id):
        treport = report.per_template.setdefault(template.id, TemplateReport())
        for slot in range(per_template):
            treport.requested += 1
            slot_seed = derive_seed("synth", seed, template.id, slot)
            accepted = False
            for attempt in range(attempts_per_slot):
                attempt_seed = derive_seed(slot_seed, attempt)
                rng = random.Random(attempt_seed)
                try:
                    trace = sample_trace(
                        template, store, index, rng, max_restarts, seed=attempt_seed
                    )
                except ExhaustedError:
                    treport.record_failure("sampling_exhausted")
                    continue
                try:
                    draft = generate_query(trace, template, generator)
                except GeneratorError:
                    treport.record_failure("generator_error")
                    continue
                if not verify_echo_back(draft, trace, template):
                    treport.record_failure("echo_mismatch")
                    continue
                ground_truth = build_ground_truth(trace, template)
                sample = DatasetSample(
                    query=draft.query,
                    ground_truth=ground_truth,
                    provenance=Provenance(
                        template_id=template.id,
                        seed=attempt_seed,
                        generator_id=generator_id,
                    ),
                    metadata={"logic": template.logic} if template.logic else {},
                )
                episode = replay_ground_truth(env, sample)
                if any(obs.is_error for _, obs in episode.transcript) or len(
                    episode.transcript
                ) != len(ground_truth.calls):
                    treport.record_failure("replay_error")
                    continue
                samples.append(sample)
                treport.accepted += 1
                accepted = True
                break
            if not accepted:
                treport.record_failure("slot_abandoned")
    return samples, report
