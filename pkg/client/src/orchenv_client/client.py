"""Episode driver over the session wire protocol.

The client performs no scoring math of its own: rewards come back from
the server, which is the single source of truth. What it adds is
transcript bookkeeping and idempotent retries — ``reset`` is replay-safe
on the server, so after a transient transport failure the driver
reconnects, resets the same sample, replays every assistant message it
already sent, and carries on.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence

from .errors import ProtocolError, ServerError, TransportError


class Connection(Protocol):
    def request(self, message: dict) -> dict: ...

    def reopen(self) -> None: ...

    def close(self) -> None: ...


@dataclass
class StepRecord:
    assistant_text: str
    responses_text: str
    calls: list[dict]
    done: bool


@dataclass
class ClientEpisode:
    """Local mirror of one server-side episode."""

    session_id: str
    dataset_index: int
    query: str = ""
    tools: list[dict] = field(default_factory=list)
    system_prompt: str = ""
    transcript: list[StepRecord] = field(default_factory=list)
    last_report: Optional[dict] = None

    @property
    def calls(self) -> list[dict]:
        return [c for record in self.transcript for c in record.calls]


# policy: (episode so far) -> next assistant message
Policy = Callable[[ClientEpisode], str]


def format_tool_calls(calls: Sequence[dict]) -> str:
    """Render call documents (``{"name", "arguments"}``) as assistant text."""
    blocks = []
    for call in calls:
        body = json.dumps(call, sort_keys=True, ensure_ascii=False)
        blocks.append(f"<tool_call>\n{body}\n</tool_call>")
    return "\n".join(blocks)


class EnvClient:
    """Drives episodes against a served environment."""

    def __init__(self, connection: Connection, retries: int = 2):
        self.connection = connection
        self.retries = retries

    # --- low-level ---------------------------------------------------------

    def _round_trip(self, kind: str, session_id: str, body: dict) -> dict:
        reply = self.connection.request(
            {"kind": kind, "session_id": session_id, "body": body}
        )
        if reply.get("kind") == "error":
            detail = reply.get("body") or {}
            raise ServerError(str(detail.get("code")), str(detail.get("message")))
        if reply.get("kind") != "ack" or reply.get("session_id") != session_id:
            raise ProtocolError(f"unexpected reply: {reply!r}")
        body = reply.get("body")
        if not isinstance(body, dict):
            raise ProtocolError("ack reply carries no body object")
        return body

    def _recover(self, episode: ClientEpisode) -> None:
        """Reconnect and replay the episode up to its current position."""
        self.connection.reopen()
        self._apply_reset(episode)
        for record in episode.transcript:
            self._round_trip(
                "step", episode.session_id, {"assistant_text": record.assistant_text}
            )

    def _with_retry(self, episode: ClientEpisode, kind: str, body: dict) -> dict:
        attempts = 0
        while True:
            try:
                return self._round_trip(kind, episode.session_id, body)
            except TransportError:
                attempts += 1
                if attempts > self.retries:
                    raise
                self._recover(episode)

    # --- protocol verbs -----------------------------------------------------

    def hello(self, session_id: str = "hello") -> dict:
        return self._round_trip("hello", session_id, {})

    def _apply_reset(self, episode: ClientEpisode) -> None:
        body = self._round_trip(
            "reset", episode.session_id, {"dataset_index": episode.dataset_index}
        )
        for key in ("query", "tools", "system_prompt"):
            if key not in body:
                raise ProtocolError(f"reset reply missing {key!r}")
        episode.query = body["query"]
        episode.tools = body["tools"]
        episode.system_prompt = body["system_prompt"]

    def reset(self, dataset_index: int, session_id: Optional[str] = None) -> ClientEpisode:
        episode = ClientEpisode(
            session_id=session_id or f"ep-{uuid.uuid4().hex}",
            dataset_index=dataset_index,
        )
        self._apply_reset(episode)
        return episode

    def step(self, episode: ClientEpisode, assistant_text: str) -> StepRecord:
        body = self._with_retry(episode, "step", {"assistant_text": assistant_text})
        try:
            record = StepRecord(
                assistant_text=assistant_text,
                responses_text=body["responses_text"],
                calls=list(body["calls"]),
                done=bool(body["done"]),
            )
        except KeyError as exc:
            raise ProtocolError(f"step reply missing {exc}")
        episode.transcript.append(record)
        return record

    def score(self, episode: ClientEpisode) -> dict:
        body = self._with_retry(episode, "score", {})
        if "reward" not in body or "eval" not in body:
            raise ProtocolError("score reply missing reward or eval")
        episode.last_report = body
        return body

    def close(self, episode: ClientEpisode) -> None:
        self._round_trip("close", episode.session_id, {})


def run_episode(
    connection: Connection,
    sample_selector: int,
    policy_callback: Policy,
    max_steps: int = 32,
    retries: int = 2,
) -> dict:
    """Drive reset -> step* -> score -> close; returns the final report body.

    ``policy_callback`` sees the episode (query, tools, transcript so far)
    and returns the next assistant message; an episode ends when the
    server reports done or ``max_steps`` messages have been sent.
    """
    client = EnvClient(connection, retries=retries)
    episode = client.reset(sample_selector)
    for _ in range(max_steps):
        record = client.step(episode, policy_callback(episode))
        if record.done:
            break
    report = client.score(episode)
    client.close(episode)
    return report
