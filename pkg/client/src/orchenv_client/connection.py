"""Line-delimited JSON transports: TCP socket or a spawned subprocess.

Both expose the same tiny surface: ``request`` sends one message and
returns one reply, ``reopen`` tears down and reconnects (used by the
retry path), ``close`` releases resources.
"""

from __future__ import annotations

import json
import socket
import subprocess
from typing import Optional, Sequence

from .errors import ProtocolError, TransportError, TransportTimeout


def _encode(message: dict) -> bytes:
    return (json.dumps(message, sort_keys=True, ensure_ascii=False) + "\n").encode(
        "utf-8"
    )


def _decode(line: bytes) -> dict:
    try:
        reply = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"server reply is not valid JSON: {exc}") from exc
    if not isinstance(reply, dict):
        raise ProtocolError("server reply must be a JSON object")
    return reply


class TcpConnection:
    """One connection to a served environment over a local TCP socket."""

    def __init__(self, host: str, port: int, timeout: float = 30.0):
        self.host = host
        self.port = port
        self.timeout = timeout
        self._sock: Optional[socket.socket] = None
        self._file = None
        self._connect()

    def _connect(self) -> None:
        try:
            self._sock = socket.create_connection(
                (self.host, self.port), timeout=self.timeout
            )
        except OSError as exc:
            raise TransportError(f"cannot connect to {self.host}:{self.port}: {exc}")
        self._file = self._sock.makefile("rb")

    def request(self, message: dict) -> dict:
        if self._sock is None:
            raise TransportError("connection is closed")
        try:
            self._sock.sendall(_encode(message))
            line = self._file.readline()
        except socket.timeout as exc:
            raise TransportTimeout(f"no reply within {self.timeout}s") from exc
        except OSError as exc:
            raise TransportError(str(exc)) from exc
        if not line:
            raise TransportError("server closed the connection")
        return _decode(line)

    def reopen(self) -> None:
        self.close()
        self._connect()

    def close(self) -> None:
        if self._file is not None:
            try:
                self._file.close()
            except OSError:
                pass
            self._file = None
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
            self._sock = None


class SubprocessConnection:
    """Spawn a serving process and talk to it over its standard streams.

    The command must speak the line protocol on stdin/stdout, e.g.
    ``orchenv serve --stdio ...``.
    """

    def __init__(self, command: Sequence[str]):
        self.command = list(command)
        self._proc: Optional[subprocess.Popen] = None
        self._spawn()

    def _spawn(self) -> None:
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except OSError as exc:
            raise TransportError(f"cannot spawn {self.command[0]!r}: {exc}")

    def request(self, message: dict) -> dict:
        proc = self._proc
        if proc is None or proc.poll() is not None:
            raise TransportError("server process is not running")
        try:
            proc.stdin.write(_encode(message))
            proc.stdin.flush()
            line = proc.stdout.readline()
        except OSError as exc:
            raise TransportError(str(exc)) from exc
        if not line:
            raise TransportError("server process closed its output")
        return _decode(line)

    def reopen(self) -> None:
        self.close()
        self._spawn()

    def close(self) -> None:
        proc = self._proc
        if proc is None:
            return
        self._proc = None
        try:
            if proc.stdin:
                proc.stdin.close()
            proc.terminate()
            proc.wait(timeout=10)
        except (OSError, subprocess.TimeoutExpired):
            proc.kill()
