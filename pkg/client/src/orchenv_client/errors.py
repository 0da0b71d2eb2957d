"""Client-side error types."""

from __future__ import annotations


class ClientError(Exception):
    """Base class for everything this client raises."""


class ProtocolError(ClientError):
    """The server reply was malformed or had an unexpected shape."""


class ServerError(ClientError):
    """The server answered with a structured error message."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class TransportError(ClientError):
    """The connection dropped or could not be established."""


class TransportTimeout(TransportError):
    """No reply arrived within the configured deadline."""
