"""Core value types shared across modules.

All types are immutable after construction (frozen dataclasses holding
JSON-shaped data) and safe to share between threads. Nested dicts/lists
are owned by their container and must not be mutated by callers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator, Mapping, Optional, Sequence

from .errors import SchemaError

# JSON-shaped value: None | bool | int | float | str | list | dict
Value = Any


class ErrorCode(str, Enum):
    """Structured error codes carried by error observations."""

    VALIDATION_FAILED = "VALIDATION_FAILED"
    CACHE_MISS = "CACHE_MISS"
    UNKNOWN_FUNCTION = "UNKNOWN_FUNCTION"
    # Wire-level only: emitted when an assistant message has a malformed block.
    PARSE_ERROR = "PARSE_ERROR"


@dataclass(frozen=True)
class ToolCall:
    """A single action: a function name plus its parameter assignment."""

    function: str
    args: Mapping[str, Value] = field(default_factory=dict)

    def __post_init__(self):
        if not self.function:
            raise ValueError("function name must be non-empty")

    def to_doc(self) -> dict:
        return {"name": self.function, "arguments": dict(self.args)}

    @classmethod
    def from_doc(cls, doc: Mapping[str, Value]) -> "ToolCall":
        if not isinstance(doc, Mapping):
            raise SchemaError("tool call document must be a map")
        name = doc.get("name")
        args = doc.get("arguments")
        if not isinstance(name, str) or not name:
            raise SchemaError("tool call document needs a non-empty 'name'")
        if not isinstance(args, Mapping):
            raise SchemaError("tool call document needs an 'arguments' map")
        return cls(function=name, args=dict(args))


@dataclass(frozen=True)
class ErrorDetail:
    code: ErrorCode
    message: str


@dataclass(frozen=True)
class Observation:
    """Structured response payload, or a structured error, from execution."""

    payload: Value = None
    is_error: bool = False
    error: Optional[ErrorDetail] = None

    def __post_init__(self):
        if self.is_error != (self.error is not None):
            raise ValueError("is_error must hold exactly when error detail is present")
        if not self.is_error and self.payload is None:
            raise ValueError("non-error observation must carry a payload")

    @classmethod
    def success(cls, payload: Value) -> "Observation":
        return cls(payload=payload)

    @classmethod
    def failure(cls, code: ErrorCode, message: str) -> "Observation":
        return cls(payload=None, is_error=True, error=ErrorDetail(code, message))

    def to_doc(self) -> dict:
        if self.is_error:
            assert self.error is not None
            return {
                "is_error": True,
                "error": {"code": self.error.code.value, "message": self.error.message},
            }
        return {"is_error": False, "payload": self.payload}

    @classmethod
    def from_doc(cls, doc: Mapping[str, Value]) -> "Observation":
        if not isinstance(doc, Mapping):
            raise SchemaError("observation document must be a map")
        if doc.get("is_error"):
            err = doc.get("error") or {}
            return cls.failure(ErrorCode(err["code"]), err.get("message", ""))
        if "payload" not in doc:
            raise SchemaError("observation document needs a 'payload'")
        return cls.success(doc["payload"])


@dataclass(frozen=True)
class DependencyBinding:
    """Where a dependent parameter's value comes from: a step and a field path."""

    from_step: int
    from_field: str


@dataclass(frozen=True)
class StepDependencies:
    depends_on: tuple[int, ...]
    dependency_args: Mapping[str, DependencyBinding] = field(default_factory=dict)


@dataclass(frozen=True)
class WorkflowTemplate:
    """Ordered function pattern plus dependency edges and field-path bindings."""

    id: str
    pattern: tuple[str, ...]
    dependencies: Mapping[int, StepDependencies] = field(default_factory=dict)
    # Optional logical-composition label propagated into synthesized samples.
    logic: Optional[str] = None

    def __post_init__(self):
        if not self.pattern:
            raise ValueError("template pattern must be non-empty")


@dataclass(frozen=True)
class GroundTruth:
    """The reference action sequence, grouped into turns.

    ``calls`` keeps template-step order; ``turn_index`` values form a
    contiguous 1..N set. ``expected_observations``, when present, aligns
    with ``calls`` positionally.
    """

    calls: tuple[tuple[int, ToolCall], ...]
    template_id: str
    expected_observations: Optional[tuple[Observation, ...]] = None

    def __post_init__(self):
        if not self.calls:
            raise ValueError("ground truth must hold at least one call")
        turns = {t for t, _ in self.calls}
        if turns != set(range(1, max(turns) + 1)):
            raise ValueError("turn indices must form a contiguous 1..N sequence")
        if self.expected_observations is not None and len(
            self.expected_observations
        ) != len(self.calls):
            raise ValueError("expected_observations must align with calls")

    @property
    def num_turns(self) -> int:
        return max(t for t, _ in self.calls)

    def flat_calls(self) -> list[ToolCall]:
        return [c for _, c in self.calls]

    def turns(self) -> list[list[ToolCall]]:
        grouped: list[list[ToolCall]] = [[] for _ in range(self.num_turns)]
        for t, call in self.calls:
            grouped[t - 1].append(call)
        return grouped

    def to_doc(self) -> dict:
        doc: dict = {
            "template_id": self.template_id,
            "calls": [[t, c.to_doc()] for t, c in self.calls],
        }
        if self.expected_observations is not None:
            doc["expected_observations"] = [o.to_doc() for o in self.expected_observations]
        return doc

    @classmethod
    def from_doc(cls, doc: Mapping[str, Value]) -> "GroundTruth":
        calls = tuple(
            (int(t), ToolCall.from_doc(c)) for t, c in doc.get("calls", [])
        )
        obs = doc.get("expected_observations")
        return cls(
            calls=calls,
            template_id=str(doc.get("template_id", "")),
            expected_observations=(
                tuple(Observation.from_doc(o) for o in obs) if obs is not None else None
            ),
        )


@dataclass(frozen=True)
class Provenance:
    template_id: str
    seed: int
    generator_id: str

    def to_doc(self) -> dict:
        return {
            "template_id": self.template_id,
            "seed": self.seed,
            "generator_id": self.generator_id,
        }


@dataclass(frozen=True)
class DatasetSample:
    """One training sample: a query plus its replayable ground truth."""

    query: str
    ground_truth: GroundTruth
    provenance: Provenance
    # Free-form labels (e.g. logical-composition type) used by stratification.
    metadata: Mapping[str, Value] = field(default_factory=dict)

    def __post_init__(self):
        if not self.query:
            raise ValueError("query must be non-empty")

    def to_doc(self) -> dict:
        doc = {
            "query": self.query,
            "ground_truth": self.ground_truth.to_doc(),
            "provenance": self.provenance.to_doc(),
        }
        if self.metadata:
            doc["metadata"] = dict(self.metadata)
        return doc

    @classmethod
    def from_doc(cls, doc: Mapping[str, Value]) -> "DatasetSample":
        prov = doc.get("provenance", {})
        return cls(
            query=doc["query"],
            ground_truth=GroundTruth.from_doc(doc["ground_truth"]),
            provenance=Provenance(
                template_id=str(prov.get("template_id", "")),
                seed=int(prov.get("seed", 0)),
                generator_id=str(prov.get("generator_id", "")),
            ),
            metadata=dict(doc.get("metadata", {})),
        )


class ParamType(str, Enum):
    STRING = "string"
    INTEGER = "integer"
    FLOAT = "float"
    BOOLEAN = "boolean"
    LIST = "list"
    MAP = "map"


class ConstraintKind(str, Enum):
    DATE = "date"            # YYYY-MM-DD, must be a real calendar date
    TIME = "time"            # HH:MM, 24-hour
    LATITUDE = "latitude"    # numeric, [-90, 90]
    LONGITUDE = "longitude"  # numeric, [-180, 180]
    ENUM = "enum"            # member of Constraint.values
    NON_EMPTY = "non_empty"  # non-empty string


@dataclass(frozen=True)
class Constraint:
    kind: ConstraintKind
    values: tuple[str, ...] = ()


@dataclass(frozen=True)
class ParamSpec:
    type: ParamType
    required: bool = True
    constraint: Optional[Constraint] = None


@dataclass(frozen=True)
class FunctionSchema:
    """Declared signature for one callable function."""

    name: str
    params: Mapping[str, ParamSpec] = field(default_factory=dict)
    # Top-level keys a successful map-rooted response must contain.
    response_fields: tuple[str, ...] = ()

    def to_doc(self) -> dict:
        params: dict = {}
        for pname, spec in self.params.items():
            pdoc: dict = {"type": spec.type.value, "required": spec.required}
            if spec.constraint is not None:
                cdoc: dict = {"kind": spec.constraint.kind.value}
                if spec.constraint.values:
                    cdoc["values"] = list(spec.constraint.values)
                pdoc["constraint"] = cdoc
            params[pname] = pdoc
        doc: dict = {"name": self.name, "params": params}
        if self.response_fields:
            doc["response_fields"] = list(self.response_fields)
        return doc

    @classmethod
    def from_doc(cls, doc: Mapping[str, Value]) -> "FunctionSchema":
        name = doc.get("name")
        if not isinstance(name, str) or not name:
            raise SchemaError("function schema needs a non-empty 'name'")
        params: dict[str, ParamSpec] = {}
        for pname, pdoc in (doc.get("params") or {}).items():
            constraint = None
            cdoc = pdoc.get("constraint")
            if cdoc:
                constraint = Constraint(
                    kind=ConstraintKind(cdoc["kind"]),
                    values=tuple(cdoc.get("values", ())),
                )
            params[pname] = ParamSpec(
                type=ParamType(pdoc["type"]),
                required=bool(pdoc.get("required", True)),
                constraint=constraint,
            )
        return cls(
            name=name,
            params=params,
            response_fields=tuple(doc.get("response_fields", ())),
        )


Registry = Mapping[str, FunctionSchema]


def registry_from_schemas(schemas: Sequence[FunctionSchema]) -> dict[str, FunctionSchema]:
    """Build a name-keyed registry, rejecting duplicate function names."""
    registry: dict[str, FunctionSchema] = {}
    for schema in schemas:
        if schema.name in registry:
            raise SchemaError(f"duplicate function name in registry: {schema.name}")
        registry[schema.name] = schema
    return registry


def iter_registry_docs(registry: Registry) -> Iterator[dict]:
    for name in sorted(registry):
        yield registry[name].to_doc()
