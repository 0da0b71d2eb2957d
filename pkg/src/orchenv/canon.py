"""Canonical serialization, hashing, and seed derivation.

One equality notion is used across the whole system: two values are equal
iff their canonical strings are equal. Map keys are sorted, there is no
insignificant whitespace, integers carry no leading zeros, floats render
in shortest round-trip decimal form, and strings are byte-exact. Null and
absent parameters are therefore distinct, and ``1`` / ``1.0`` / ``true``
are three different values.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any, Mapping


def canonical_value(value: Any) -> str:
    """Render a JSON-shaped value in canonical text form."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def values_equal(a: Any, b: Any) -> bool:
    """Canonical equality over JSON-shaped values."""
    return canonical_value(a) == canonical_value(b)


def args_equal(a: Mapping[str, Any], b: Mapping[str, Any]) -> bool:
    """Canonical equality over whole parameter maps."""
    return canonical_value(dict(a)) == canonical_value(dict(b))


def canonical_key(call: Any) -> str:
    """Digest of (function, canonicalized args); stable across processes.

    ``call`` is any object with ``function`` and ``args`` attributes.
    """
    payload = canonical_value([call.function, call.args])
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def json_type(value: Any) -> str:
    """Coarse runtime type name used by struct scoring and validators.

    Booleans are checked before integers so ``True`` is never an integer.
    """
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, float):
        return "float"
    if isinstance(value, str):
        return "string"
    if isinstance(value, list):
        return "list"
    if isinstance(value, dict):
        return "map"
    raise TypeError(f"not a JSON-shaped value: {type(value).__name__}")


def derive_seed(*parts: Any) -> int:
    """Stable 64-bit seed derived from arbitrary JSON-shaped parts.

    Used everywhere a sub-seed is needed (per template, per slot, per
    call) so the whole pipeline is reproducible from one root seed.
    """
    digest = hashlib.sha256(canonical_value(list(parts)).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
