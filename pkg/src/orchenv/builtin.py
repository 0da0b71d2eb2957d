"""Access to data shipped inside the package: system prompt and templates."""

from __future__ import annotations

from importlib import resources

from .templates import WorkflowTemplate, parse_template


def system_prompt() -> str:
    return (
        resources.files("orchenv").joinpath("data/system_prompt.txt").read_text()
    )


def builtin_templates() -> list[WorkflowTemplate]:
    """The shipped template library, sorted by id."""
    root = resources.files("orchenv").joinpath("data/templates")
    templates = []
    for entry in root.iterdir():
        if entry.name.endswith(".json"):
            templates.append(
                parse_template(entry.read_text(), template_id=entry.name[:-5])
            )
    return sorted(templates, key=lambda t: t.id)


def builtin_template(template_id: str) -> WorkflowTemplate:
    for template in builtin_templates():
        if template.id == template_id:
            return template
    raise KeyError(f"no builtin template {template_id!r}")
