"""Workflow template and registry files: parsing, validation, serialization.

Template documents are JSON with keys ``pattern``, ``dependencies``,
``depends_on``, ``dependency_args``, ``from_step``, ``from_field`` — one
template per document. Dependency edges point forward only, so the
dependency relation is a strict partial order by construction.
"""

from __future__ import annotations

import graphlib
import json
from pathlib import Path
from typing import Any, Iterable, Mapping

from .errors import CycleError, SchemaError
from .model import (
    DependencyBinding,
    FunctionSchema,
    Registry,
    StepDependencies,
    WorkflowTemplate,
    registry_from_schemas,
)
from .paths import parse_path


def parse_template(doc: str | Mapping[str, Any], *, template_id: str | None = None) -> WorkflowTemplate:
    """Parse and validate one template document (JSON text or parsed map).

    ``template_id`` is used when the document carries no ``id`` key
    (loaders pass the file stem).
    """
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"template document is not valid JSON: {exc}") from exc
    if not isinstance(doc, Mapping):
        raise SchemaError("template document must be a map")

    pattern = doc.get("pattern")
    if not isinstance(pattern, list) or not pattern:
        raise SchemaError("template needs a non-empty 'pattern' list")
    if not all(isinstance(f, str) and f for f in pattern):
        raise SchemaError("every pattern entry must be a non-empty function name")

    tid = doc.get("id", template_id)
    if not tid:
        raise SchemaError("template needs an 'id' (or a caller-supplied default)")

    dependencies: dict[int, StepDependencies] = {}
    for raw_step, dep_doc in (doc.get("dependencies") or {}).items():
        try:
            step = int(raw_step)
        except (TypeError, ValueError):
            raise SchemaError(f"dependency key {raw_step!r} is not a step index")
        if not 0 <= step < len(pattern):
            raise SchemaError(f"dependency step {step} outside pattern")
        if not isinstance(dep_doc, Mapping):
            raise SchemaError(f"dependencies[{step}] must be a map")

        depends_on = dep_doc.get("depends_on", [])
        if not isinstance(depends_on, list):
            raise SchemaError(f"dependencies[{step}].depends_on must be a list")
        for d in depends_on:
            if not isinstance(d, int) or not 0 <= d < len(pattern):
                raise SchemaError(f"dependencies[{step}] references invalid step {d!r}")
            if d >= step:
                raise CycleError(
                    f"step {step} depends on step {d}: edges must point forward"
                )

        bindings: dict[str, DependencyBinding] = {}
        for pname, bdoc in (dep_doc.get("dependency_args") or {}).items():
            if not isinstance(bdoc, Mapping) or "from_step" not in bdoc or "from_field" not in bdoc:
                raise SchemaError(
                    f"dependency_args[{pname}] needs 'from_step' and 'from_field'"
                )
            from_step = bdoc["from_step"]
            if not isinstance(from_step, int):
                raise SchemaError(f"dependency_args[{pname}].from_step must be an integer")
            if from_step == step:
                raise CycleError(f"step {step} binds {pname!r} to itself")
            if from_step not in depends_on:
                raise SchemaError(
                    f"dependency_args[{pname}].from_step {from_step} not in depends_on"
                )
            from_field = bdoc["from_field"]
            if not isinstance(from_field, str):
                raise SchemaError(f"dependency_args[{pname}].from_field must be a string")
            parse_path(from_field)  # raises PathSyntaxError on bad syntax
            bindings[pname] = DependencyBinding(from_step=from_step, from_field=from_field)

        dependencies[step] = StepDependencies(
            depends_on=tuple(depends_on), dependency_args=bindings
        )

    logic = doc.get("logic")
    if logic is not None and not isinstance(logic, str):
        raise SchemaError("'logic' must be a string when present")

    return WorkflowTemplate(
        id=str(tid), pattern=tuple(pattern), dependencies=dependencies, logic=logic
    )


def serialize_template(template: WorkflowTemplate) -> dict:
    """Inverse of :func:`parse_template` (round-trips exactly)."""
    deps: dict[str, Any] = {}
    for step in sorted(template.dependencies):
        sd = template.dependencies[step]
        deps[str(step)] = {
            "depends_on": list(sd.depends_on),
            "dependency_args": {
                pname: {"from_step": b.from_step, "from_field": b.from_field}
                for pname, b in sd.dependency_args.items()
            },
        }
    doc: dict[str, Any] = {
        "id": template.id,
        "pattern": list(template.pattern),
        "dependencies": deps,
    }
    if template.logic is not None:
        doc["logic"] = template.logic
    return doc


def template_to_json(template: WorkflowTemplate) -> str:
    return json.dumps(serialize_template(template), indent=1, sort_keys=True)


def load_templates(directory: str | Path) -> list[WorkflowTemplate]:
    """Load every ``*.json`` template in a directory, sorted by id."""
    templates = []
    for path in sorted(Path(directory).glob("*.json")):
        templates.append(parse_template(path.read_text(), template_id=path.stem))
    return sorted(templates, key=lambda t: t.id)


def dependency_edges(template: WorkflowTemplate) -> tuple[tuple[int, int], ...]:
    """The declared edge set (j, i): step i depends on step j's observation."""
    edges = []
    for step in sorted(template.dependencies):
        for dep in template.dependencies[step].depends_on:
            edges.append((dep, step))
    return tuple(edges)


def topological_order(template: WorkflowTemplate) -> list[int]:
    """Topologically sorted step indices; raises CycleError if not a DAG."""
    graph: dict[int, set[int]] = {i: set() for i in range(len(template.pattern))}
    for j, i in dependency_edges(template):
        graph[i].add(j)
    try:
        return list(graphlib.TopologicalSorter(graph).static_order())
    except graphlib.CycleError as exc:  # unreachable for parsed templates
        raise CycleError(str(exc)) from exc


def turn_levels(template: WorkflowTemplate) -> list[int]:
    """1-based turn level per step: 1 + the longest dependency path into it.

    Steps with no ordering constraint between them land on the same level
    and therefore share a turn in synthesized ground truth.
    """
    levels = [1] * len(template.pattern)
    for step in topological_order(template):
        deps = template.dependencies.get(step)
        if deps and deps.depends_on:
            levels[step] = 1 + max(levels[d] for d in deps.depends_on)
    return levels


def dependency_param_names(template: WorkflowTemplate, step: int) -> frozenset[str]:
    deps = template.dependencies.get(step)
    if deps is None:
        return frozenset()
    return frozenset(deps.dependency_args)


# --- registry files ---------------------------------------------------------


def parse_registry(doc: str | Iterable[Mapping[str, Any]]) -> dict[str, FunctionSchema]:
    """Parse a registry document: a JSON list of function schemas."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"registry document is not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise SchemaError("registry document must be a list of function schemas")
    return registry_from_schemas([FunctionSchema.from_doc(d) for d in doc])


def load_registry(path: str | Path) -> dict[str, FunctionSchema]:
    return parse_registry(Path(path).read_text())


def save_registry(registry: Registry, path: str | Path) -> None:
    docs = [registry[name].to_doc() for name in sorted(registry)]
    Path(path).write_text(json.dumps(docs, indent=1, sort_keys=True) + "\n")
