"""Line-delimited dataset and prediction files.

Dataset files hold one sample per line; samples are addressed by their
0-based line index. Prediction files hold one episode per line:
``{"sample_id": <index>, "turns": [[{"name","arguments"}, ...], ...]}``.
A trajectory adapter accepts message-list documents instead of turns
(see ``episode_from_trajectory``).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping, Sequence

from .canon import canonical_value
from .errors import ParseError, SchemaError
from .model import DatasetSample, ToolCall
from .protocol import parse_tool_calls


def save_dataset(samples: Sequence[DatasetSample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(canonical_value(sample.to_doc()))
            fh.write("\n")


def load_dataset(path: str | Path) -> list[DatasetSample]:
    samples = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                samples.append(DatasetSample.from_doc(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise SchemaError(f"{path}:{lineno}: bad sample: {exc}") from exc
    return samples


def episode_from_turns_doc(doc: Sequence[Any]) -> list[list[ToolCall]]:
    return [[ToolCall.from_doc(c) for c in turn] for turn in doc]


def episode_from_trajectory(doc: Mapping[str, Any]) -> list[list[ToolCall]]:
    """Adapter for message-list trajectory documents.

    Each assistant message contributes one turn: either its ``tool_calls``
    array (entries shaped ``{"name", "arguments"}`` or OpenAI-style
    ``{"function": {"name", "arguments"}}``) or the ``<tool_call>`` blocks
    embedded in its ``content``. Messages without calls are skipped.
    """
    turns: list[list[ToolCall]] = []
    for message in doc.get("messages", []):
        if message.get("role") != "assistant":
            continue
        calls: list[ToolCall] = []
        for tc in message.get("tool_calls") or []:
            if "function" in tc:
                fn = tc["function"]
                arguments = fn.get("arguments", {})
                if isinstance(arguments, str):
                    arguments = json.loads(arguments)
                calls.append(ToolCall(fn["name"], arguments))
            else:
                calls.append(ToolCall.from_doc(tc))
        if not calls and isinstance(message.get("content"), str):
            try:
                calls = parse_tool_calls(message["content"])
            except ParseError:
                calls = []
        if calls:
            turns.append(calls)
    return turns


def load_predictions(path: str | Path, n_samples: int) -> list[list[list[ToolCall]]]:
    """Read a predictions file into per-sample turn lists.

    Samples without a prediction line get an empty episode.
    """
    episodes: list[list[list[ToolCall]]] = [[] for _ in range(n_samples)]
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                sample_id = int(doc["sample_id"])
                if "turns" in doc:
                    episode = episode_from_turns_doc(doc["turns"])
                elif "messages" in doc:
                    episode = episode_from_trajectory(doc)
                else:
                    raise KeyError("need 'turns' or 'messages'")
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise SchemaError(f"{path}:{lineno}: bad prediction: {exc}") from exc
            if not 0 <= sample_id < n_samples:
                raise SchemaError(f"{path}:{lineno}: sample_id {sample_id} out of range")
            episodes[sample_id] = episode
    return episodes


def save_predictions(
    episodes: Sequence[Sequence[Sequence[ToolCall]]], path: str | Path
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sample_id, turns in enumerate(episodes):
            doc = {
                "sample_id": sample_id,
                "turns": [[c.to_doc() for c in turn] for turn in turns],
            }
            fh.write(canonical_value(doc))
            fh.write("\n")
