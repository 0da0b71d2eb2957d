"""Field-path parsing and extraction over observation payloads.

Paths address a single value inside a list- or map-rooted payload, e.g.
``search_results[0].vehicle_id`` or ``[0].coordinates.latitude`` (a
leading index binds to the payload root). Grammar::

    path  := seg (('.' field) | index)*
    seg   := field | index
    field := [A-Za-z_][A-Za-z0-9_]*
    index := '[' digits ']'

No wildcards or slices: extraction is always single-valued.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import PathNotFound, PathSyntaxError
from .model import Observation, Value


@dataclass(frozen=True)
class Field:
    name: str


@dataclass(frozen=True)
class Index:
    n: int


Segment = Union[Field, Index]


@dataclass(frozen=True)
class PathExpr:
    segments: tuple[Segment, ...]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("path must hold at least one segment")

    def render(self) -> str:
        """Canonical string form; ``parse_path(render(p)) == p``."""
        out: list[str] = []
        for i, seg in enumerate(self.segments):
            if isinstance(seg, Field):
                out.append(seg.name if i == 0 else f".{seg.name}")
            else:
                out.append(f"[{seg.n}]")
        return "".join(out)


def _is_ident_start(ch: str) -> bool:
    return ch.isascii() and (ch.isalpha() or ch == "_")


def _is_ident_char(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch == "_")


def parse_path(src: str) -> PathExpr:
    """Parse a path string, reporting the offset of the first bad token."""
    if not src:
        raise PathSyntaxError("empty path", 0)
    segments: list[Segment] = []
    i = 0
    n = len(src)

    def scan_field(start: int) -> int:
        if start >= n or not _is_ident_start(src[start]):
            raise PathSyntaxError("expected field name", start)
        j = start + 1
        while j < n and _is_ident_char(src[j]):
            j += 1
        segments.append(Field(src[start:j]))
        return j

    def scan_index(start: int) -> int:
        # caller guarantees src[start] == '['
        j = start + 1
        digits_start = j
        while j < n and src[j].isdigit():
            j += 1
        if j == digits_start:
            raise PathSyntaxError("expected digits in index", j)
        if j >= n or src[j] != "]":
            raise PathSyntaxError("unterminated index", j)
        segments.append(Index(int(src[digits_start:j])))
        return j + 1

    i = scan_index(0) if src[0] == "[" else scan_field(0)
    while i < n:
        if src[i] == ".":
            i = scan_field(i + 1)
        elif src[i] == "[":
            i = scan_index(i)
        else:
            raise PathSyntaxError("expected '.' or '['", i)
    return PathExpr(tuple(segments))


def extract_value(path: PathExpr, root: Value) -> Value:
    """Navigate ``root`` segment by segment; never mutates its input."""
    node = root
    for k, seg in enumerate(path.segments):
        if isinstance(seg, Field):
            if not isinstance(node, dict):
                raise PathNotFound(
                    f"field {seg.name!r} addressed on a non-map node", k
                )
            if seg.name not in node:
                raise PathNotFound(f"field {seg.name!r} absent", k)
            node = node[seg.name]
        else:
            if not isinstance(node, list):
                raise PathNotFound(f"index [{seg.n}] addressed on a non-list node", k)
            if seg.n >= len(node):
                raise PathNotFound(
                    f"index [{seg.n}] out of bounds for length {len(node)}", k
                )
            node = node[seg.n]
    return node


def extract(path: PathExpr, obs: Observation) -> Value:
    """Extract the addressed value from a successful observation.

    Dependency chains are only defined over successful observations, so
    calling this on an error observation is a caller bug, not a soft miss.
    """
    if obs.is_error:
        raise ValueError("cannot extract from an error observation")
    return extract_value(path, obs.payload)
