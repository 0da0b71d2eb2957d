"""Text wire format for tool calls and tool responses.

Assistant messages carry ``<tool_call>`` blocks whose bodies are JSON
objects with ``name`` and ``arguments``; the environment answers with
``<tool_response>`` blocks whose bodies wrap the payload (or structured
error) under a ``result`` key. Multiple blocks in one message are the
parallel calls of a single turn.
"""

from __future__ import annotations

import json
import re

from .errors import ParseError
from .model import Observation, ToolCall

_TOOL_CALL_RE = re.compile(r"<tool_call>(.*?)</tool_call>", re.DOTALL)
_TOOL_RESPONSE_RE = re.compile(r"<tool_response>(.*?)</tool_response>", re.DOTALL)


def parse_tool_calls(text: str) -> list[ToolCall]:
    """Extract every tool-call block, in document order.

    Zero blocks is a valid empty result (a terminal assistant message).
    """
    calls: list[ToolCall] = []
    for i, match in enumerate(_TOOL_CALL_RE.finditer(text)):
        body = match.group(1).strip()
        try:
            doc = json.loads(body)
        except json.JSONDecodeError as exc:
            raise ParseError(i, f"body is not valid JSON: {exc.msg}")
        if not isinstance(doc, dict):
            raise ParseError(i, "body must be a JSON object")
        name = doc.get("name")
        if not isinstance(name, str) or not name:
            raise ParseError(i, "missing or empty 'name'")
        arguments = doc.get("arguments")
        if not isinstance(arguments, dict):
            raise ParseError(i, "missing 'arguments' object")
        calls.append(ToolCall(function=name, args=arguments))
    return calls


def render_tool_call(call: ToolCall) -> str:
    body = json.dumps(call.to_doc(), sort_keys=True, ensure_ascii=False)
    return f"<tool_call>\n{body}\n</tool_call>"


def render_tool_calls(calls: list[ToolCall]) -> str:
    return "\n".join(render_tool_call(c) for c in calls)


def response_body(obs: Observation) -> dict:
    """The wire document for one observation, wrapped under ``result``."""
    if obs.is_error:
        assert obs.error is not None
        return {
            "result": {
                "error": {"code": obs.error.code.value, "message": obs.error.message}
            }
        }
    return {"result": obs.payload}


def render_tool_response(obs: Observation) -> str:
    body = json.dumps(response_body(obs), sort_keys=True, ensure_ascii=False)
    return f"<tool_response>\n{body}\n</tool_response>"


def parse_tool_responses(text: str) -> list[dict]:
    """Extract every response body; used by tests and episode bookkeeping."""
    bodies = []
    for i, match in enumerate(_TOOL_RESPONSE_RE.finditer(text)):
        try:
            bodies.append(json.loads(match.group(1).strip()))
        except json.JSONDecodeError as exc:
            raise ParseError(i, f"response body is not valid JSON: {exc.msg}")
    return bodies
