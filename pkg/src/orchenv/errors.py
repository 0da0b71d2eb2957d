"""Exception types shared across the package."""

from __future__ import annotations


class OrchenvError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(OrchenvError):
    """A document is missing a required field or has the wrong shape."""


class CycleError(OrchenvError):
    """A template step depends on itself or on a later step."""


class PathSyntaxError(OrchenvError):
    """A field-path string failed to parse.

    ``offset`` is the position of the first invalid character.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class PathNotFound(OrchenvError):
    """A field-path segment could not be resolved against a payload.

    ``segment_index`` identifies the failing segment (0-based).
    """

    def __init__(self, message: str, segment_index: int):
        super().__init__(f"{message} (segment {segment_index})")
        self.segment_index = segment_index


class ConflictError(OrchenvError):
    """Two cache inserts shared a key but carried different observations."""

    def __init__(self, key: str, first_id: int, second_id: int):
        super().__init__(
            f"conflicting observations for key {key}: entries {first_id} and {second_id}"
        )
        self.key = key
        self.first_id = first_id
        self.second_id = second_id


class UpstreamError(OrchenvError):
    """The upstream failed to answer a call during cache expansion."""

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


class ClosureError(OrchenvError):
    """A dependency extraction failed against a stored observation.

    Raised when the cache does not satisfy the closure property; always
    indicates a build bug rather than a runtime condition.
    """


class ParseError(OrchenvError):
    """A tool-call block in an assistant message is malformed."""

    def __init__(self, block_index: int, reason: str):
        super().__init__(f"block {block_index}: {reason}")
        self.block_index = block_index
        self.reason = reason


class ExhaustedError(OrchenvError):
    """Trace sampling gave up after the configured number of restarts."""

    def __init__(self, restarts: int):
        super().__init__(f"sampling exhausted after {restarts} restarts")
        self.restarts = restarts


class GeneratorError(OrchenvError):
    """A query generator failed or returned an unusable draft."""


class EpisodeClosedError(OrchenvError):
    """A step was attempted on an episode that already finished."""
