"""Session-based wire protocol for external trainers.

Messages are line-delimited JSON objects ``{"kind", "session_id", "body"}``
flowing over standard streams or a local TCP socket. One request gets
exactly one response; responses are ``ack`` with a kind-specific body or
``error`` with ``{"code", "message"}``. Any byte sequence on the wire
yields an error message or a valid response — the server never aborts.

Request kinds:

* ``hello``  -> environment summary (protocol version, counts, seed)
* ``reset``  body ``{"dataset_index": i}`` -> system prompt, query, tool schemas
* ``step``   body ``{"assistant_text": s}`` -> tool responses, calls, done flag
* ``score``  -> reward report and turn-accuracy fragment for the transcript
* ``close``  -> frees the session

Sessions are keyed by ``session_id``; many sessions share one immutable
environment and never see each other's transcripts.
"""

from __future__ import annotations

import json
import logging
import socketserver
import sys
import threading
from dataclasses import dataclass, field
from typing import IO, Optional

from .builtin import system_prompt
from .cache import CacheStore
from .env import Environment, EpisodeState
from .evaluate import turn_accuracy
from .model import DatasetSample, Registry, iter_registry_docs
from .rewards import score_total
from .templates import WorkflowTemplate, dependency_edges

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = 1


@dataclass
class ServiceConfig:
    cache_path: str = ""
    templates_dir: str = ""
    registry_path: str = ""
    dataset_path: str = ""
    lam: float = 0.5
    max_turns: int = 10
    seed: int = 0
    # "stdio" or "host:port"
    listen: str = "stdio"

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")

    @classmethod
    def from_file(cls, path: str, **overrides) -> "ServiceConfig":
        doc = json.loads(open(path, "r", encoding="utf-8").read())
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**doc)


@dataclass
class _Session:
    episode: EpisodeState
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionServer:
    """Protocol handler over one frozen environment; transport-agnostic."""

    def __init__(
        self,
        store: CacheStore,
        registry: Registry,
        templates: dict[str, WorkflowTemplate],
        samples: list[DatasetSample],
        lam: float = 0.5,
        max_turns: int = 10,
        seed: int = 0,
    ):
        self.env = Environment(store, registry, max_turns=max_turns)
        self.registry = registry
        self.templates = templates
        self.samples = samples
        self.lam = lam
        self.seed = seed
        self.system_prompt = system_prompt()
        self._sessions: dict[str, _Session] = {}
        self._sessions_lock = threading.Lock()

    # --- plumbing ---------------------------------------------------------

    def _error(self, session_id: str, code: str, message: str) -> dict:
        return {
            "kind": "error",
            "session_id": session_id,
            "body": {"code": code, "message": message},
        }

    def _ack(self, session_id: str, body: Optional[dict] = None) -> dict:
        return {"kind": "ack", "session_id": session_id, "body": body or {}}

    def handle_line(self, line: str) -> str:
        """Decode, dispatch, encode; malformed input yields an error message."""
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            reply = self._error("", "BAD_REQUEST", f"not valid JSON: {exc.msg}")
            return json.dumps(reply, sort_keys=True, ensure_ascii=False)
        if not isinstance(msg, dict):
            msg = {}
        reply = self.handle_message(msg)
        return json.dumps(reply, sort_keys=True, ensure_ascii=False)

    def _session(self, session_id: str) -> Optional[_Session]:
        with self._sessions_lock:
            return self._sessions.get(session_id)

    # --- dispatch ---------------------------------------------------------

    def handle_message(self, msg: dict) -> dict:
        session_id = msg.get("session_id")
        if not isinstance(session_id, str) or not session_id:
            return self._error("", "BAD_REQUEST", "missing session_id")
        kind = msg.get("kind")
        body = msg.get("body") or {}
        if not isinstance(body, dict):
            return self._error(session_id, "BAD_REQUEST", "body must be an object")
        try:
            if kind == "hello":
                return self._handle_hello(session_id)
            if kind == "reset":
                return self._handle_reset(session_id, body)
            if kind == "step":
                return self._handle_step(session_id, body)
            if kind == "score":
                return self._handle_score(session_id)
            if kind == "close":
                return self._handle_close(session_id)
        except Exception as exc:  # crash-free protocol: report, never abort
            logger.exception("error handling %s", kind)
            return self._error(session_id, "INTERNAL", f"{type(exc).__name__}: {exc}")
        return self._error(session_id, "BAD_REQUEST", f"unknown kind {kind!r}")

    def _handle_hello(self, session_id: str) -> dict:
        return self._ack(
            session_id,
            {
                "protocol": PROTOCOL_VERSION,
                "functions": len(self.registry),
                "samples": len(self.samples),
                "lambda": self.lam,
                "max_turns": self.env.max_turns,
                "seed": self.seed,
            },
        )

    def _handle_reset(self, session_id: str, body: dict) -> dict:
        index = body.get("dataset_index", body.get("sample_id"))
        if not isinstance(index, int) or not 0 <= index < len(self.samples):
            return self._error(
                session_id, "NO_SUCH_SAMPLE", f"dataset_index {index!r} out of range"
            )
        sample = self.samples[index]
        episode = self.env.open_episode(sample)
        with self._sessions_lock:
            # reset is replay-safe: re-resetting replaces any existing episode
            self._sessions[session_id] = _Session(episode=episode)
        return self._ack(
            session_id,
            {
                "dataset_index": index,
                "query": sample.query,
                "system_prompt": self.system_prompt,
                "tools": list(iter_registry_docs(self.registry)),
            },
        )

    def _handle_step(self, session_id: str, body: dict) -> dict:
        session = self._session(session_id)
        if session is None:
            return self._error(session_id, "NO_SESSION", "reset first")
        text = body.get("assistant_text")
        if not isinstance(text, str):
            return self._error(session_id, "BAD_REQUEST", "missing assistant_text")
        with session.lock:
            if session.episode.closed:
                return self._error(session_id, "EPISODE_CLOSED", "episode finished")
            result = self.env.step(session.episode, text)
        return self._ack(
            session_id,
            {
                "responses_text": result.responses_text,
                "calls": [c.to_doc() for c in result.calls],
                "done": result.done,
            },
        )

    def _handle_score(self, session_id: str) -> dict:
        session = self._session(session_id)
        if session is None:
            return self._error(session_id, "NO_SESSION", "reset first")
        with session.lock:
            episode = session.episode
            sample = episode.sample
            template = self.templates.get(sample.ground_truth.template_id)
            if template is None:
                return self._error(
                    session_id,
                    "NO_TEMPLATE",
                    f"template {sample.ground_truth.template_id!r} not loaded",
                )
            report = score_total(
                episode.predicted_calls(),
                sample.ground_truth,
                episode.transcript,
                dependency_edges(template),
                lam=self.lam,
                registry=self.registry,
            )
            n_succ, n_total = turn_accuracy(
                episode.predicted_turns(), sample.ground_truth
            )
        return self._ack(
            session_id,
            {
                "reward": report.to_doc(),
                "eval": {"n_succ": n_succ, "n_total": n_total},
            },
        )

    def _handle_close(self, session_id: str) -> dict:
        with self._sessions_lock:
            self._sessions.pop(session_id, None)
        return self._ack(session_id, {"closed": True})

    # --- transports -------------------------------------------------------

    def serve_stdio(self, stdin: IO[str] = None, stdout: IO[str] = None) -> None:
        """Serve one line-delimited connection on standard streams."""
        stdin = stdin if stdin is not None else sys.stdin
        stdout = stdout if stdout is not None else sys.stdout
        for line in stdin:
            line = line.strip()
            if not line:
                continue
            stdout.write(self.handle_line(line))
            stdout.write("\n")
            stdout.flush()

    def serve_tcp(self, host: str, port: int) -> "socketserver.ThreadingTCPServer":
        """Start a threaded TCP server; returns it (caller owns shutdown)."""
        handler_server = self

        class Handler(socketserver.StreamRequestHandler):
            def handle(self):
                for raw in self.rfile:
                    try:
                        line = raw.decode("utf-8", errors="replace").strip()
                    except Exception:
                        continue
                    if not line:
                        continue
                    reply = handler_server.handle_line(line)
                    self.wfile.write(reply.encode("utf-8") + b"\n")
                    self.wfile.flush()

        class Server(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        server = Server((host, port), Handler)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        logger.info("serving on %s:%d", host, server.server_address[1])
        return server
