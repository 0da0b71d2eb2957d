"""Argument validation against function schemas.

Eight validators run in a fixed order, collecting every violation rather
than stopping at the first, so error observations read like real API
error bodies.
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass
from enum import IntEnum

from .canon import json_type
from .model import ConstraintKind, FunctionSchema, ParamType, ToolCall


class Validator(IntEnum):
    REQUIRED = 1
    TYPE = 2
    DATE_FORMAT = 3
    TIME_FORMAT = 4
    LATITUDE_RANGE = 5
    LONGITUDE_RANGE = 6
    ENUM_MEMBER = 7
    NON_EMPTY = 8


@dataclass(frozen=True)
class Violation:
    validator: Validator
    param: str
    message: str


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[Violation, ...]

    @classmethod
    def from_violations(cls, violations: list[Violation]) -> "ValidationResult":
        return cls(ok=not violations, violations=tuple(violations))


_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_TIME_RE = re.compile(r"^([01]\d|2[0-3]):[0-5]\d$")

# declared type -> accepted runtime type names (ints widen to float)
_ACCEPTED = {
    ParamType.STRING: ("string",),
    ParamType.INTEGER: ("integer",),
    ParamType.FLOAT: ("float", "integer"),
    ParamType.BOOLEAN: ("boolean",),
    ParamType.LIST: ("list",),
    ParamType.MAP: ("map",),
}

_CONSTRAINT_VALIDATOR = {
    ConstraintKind.DATE: Validator.DATE_FORMAT,
    ConstraintKind.TIME: Validator.TIME_FORMAT,
    ConstraintKind.LATITUDE: Validator.LATITUDE_RANGE,
    ConstraintKind.LONGITUDE: Validator.LONGITUDE_RANGE,
    ConstraintKind.ENUM: Validator.ENUM_MEMBER,
    ConstraintKind.NON_EMPTY: Validator.NON_EMPTY,
}


def _is_real_date(value: str) -> bool:
    if not _DATE_RE.match(value):
        return False
    year, month, day = value.split("-")
    try:
        datetime.date(int(year), int(month), int(day))
    except ValueError:
        return False
    return True


def validate_args(schema: FunctionSchema, call: ToolCall) -> ValidationResult:
    """Run the eight validators in order, collecting all violations.

    Constraint checks skip values whose runtime type already failed the
    type check (the violation is attributed once, to validator 2).
    """
    violations: list[Violation] = []
    args = call.args

    for pname, spec in schema.params.items():
        if spec.required and pname not in args:
            violations.append(
                Violation(Validator.REQUIRED, pname, "required parameter missing")
            )

    type_ok: dict[str, bool] = {}
    for pname, spec in schema.params.items():
        if pname not in args:
            continue
        actual = json_type(args[pname])
        ok = actual in _ACCEPTED[spec.type]
        type_ok[pname] = ok
        if not ok:
            violations.append(
                Violation(
                    Validator.TYPE,
                    pname,
                    f"expected {spec.type.value}, got {actual}",
                )
            )

    for validator in (
        Validator.DATE_FORMAT,
        Validator.TIME_FORMAT,
        Validator.LATITUDE_RANGE,
        Validator.LONGITUDE_RANGE,
        Validator.ENUM_MEMBER,
        Validator.NON_EMPTY,
    ):
        for pname, spec in schema.params.items():
            constraint = spec.constraint
            if (
                constraint is None
                or _CONSTRAINT_VALIDATOR[constraint.kind] is not validator
                or pname not in args
                or not type_ok.get(pname, False)
            ):
                continue
            value = args[pname]
            if validator is Validator.DATE_FORMAT:
                if not _is_real_date(value):
                    violations.append(
                        Violation(validator, pname, f"{value!r} is not a valid YYYY-MM-DD date")
                    )
            elif validator is Validator.TIME_FORMAT:
                if not _TIME_RE.match(value):
                    violations.append(
                        Violation(validator, pname, f"{value!r} is not a valid HH:MM time")
                    )
            elif validator is Validator.LATITUDE_RANGE:
                if not -90 <= value <= 90:
                    violations.append(
                        Violation(validator, pname, f"latitude {value} outside [-90, 90]")
                    )
            elif validator is Validator.LONGITUDE_RANGE:
                if not -180 <= value <= 180:
                    violations.append(
                        Violation(validator, pname, f"longitude {value} outside [-180, 180]")
                    )
            elif validator is Validator.ENUM_MEMBER:
                if value not in constraint.values:
                    allowed = ", ".join(constraint.values)
                    violations.append(
                        Violation(validator, pname, f"{value!r} not one of: {allowed}")
                    )
            elif validator is Validator.NON_EMPTY:
                if not value:
                    violations.append(
                        Violation(validator, pname, "must be a non-empty string")
                    )

    return ValidationResult.from_violations(violations)
