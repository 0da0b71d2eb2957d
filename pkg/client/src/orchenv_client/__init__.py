"""Thin trainer-side client for the orchenv session wire protocol."""

from .client import (
    ClientEpisode,
    EnvClient,
    StepRecord,
    format_tool_calls,
    run_episode,
)
from .connection import SubprocessConnection, TcpConnection
from .errors import (
    ClientError,
    ProtocolError,
    ServerError,
    TransportError,
    TransportTimeout,
)

__version__ = "0.1.0"
