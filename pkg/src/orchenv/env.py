"""The deterministic execution environment and multi-turn episodes.

An Environment is an immutable bundle of a frozen cache store and a
schema registry; any number of episodes may run against it concurrently.
A bad call never aborts an episode — unknown functions, validation
failures, and cache misses all come back as structured error
observations the agent can react to.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .cache import CacheStore
from .canon import canonical_key
from .errors import EpisodeClosedError, ParseError
from .model import DatasetSample, ErrorCode, Observation, Registry, ToolCall
from .protocol import parse_tool_calls, render_tool_calls, render_tool_response
from .validators import validate_args

DEFAULT_MAX_TURNS = 10


@dataclass
class EpisodeState:
    """Mutable per-episode history; owned by exactly one session."""

    sample: DatasetSample
    transcript: list[tuple[ToolCall, Observation]] = field(default_factory=list)
    # calls executed per call-bearing assistant message, in order
    turn_sizes: list[int] = field(default_factory=list)
    turn_count: int = 0
    closed: bool = False

    def predicted_calls(self) -> list[ToolCall]:
        return [call for call, _ in self.transcript]

    def predicted_turns(self) -> list[list[ToolCall]]:
        turns: list[list[ToolCall]] = []
        cursor = 0
        for size in self.turn_sizes:
            turns.append([call for call, _ in self.transcript[cursor : cursor + size]])
            cursor += size
        return turns


@dataclass(frozen=True)
class StepResult:
    responses_text: str
    calls: tuple[ToolCall, ...]
    done: bool


class Environment:
    """Validate, execute from cache, and drive episodes."""

    def __init__(
        self,
        store: CacheStore,
        registry: Optional[Registry] = None,
        max_turns: int = DEFAULT_MAX_TURNS,
    ):
        self.store = store
        # None disables schema checks (replay over a trusted cache)
        self.registry = registry
        self.max_turns = max_turns

    def execute(self, call: ToolCall) -> Observation:
        """Serve one call; failures are error observations, never raises."""
        if self.registry is not None:
            schema = self.registry.get(call.function)
            if schema is None:
                return Observation.failure(
                    ErrorCode.UNKNOWN_FUNCTION, f"unknown function {call.function!r}"
                )
            result = validate_args(schema, call)
            if not result.ok:
                detail = "; ".join(
                    f"{v.param}: {v.message} (validator {int(v.validator)})"
                    for v in result.violations
                )
                return Observation.failure(ErrorCode.VALIDATION_FAILED, detail)
        cached = self.store.lookup(canonical_key(call))
        if cached is None:
            return Observation.failure(
                ErrorCode.CACHE_MISS,
                f"no recorded response for {call.function} with these arguments",
            )
        return cached

    def open_episode(self, sample: DatasetSample) -> EpisodeState:
        return EpisodeState(sample=sample)

    def step(self, episode: EpisodeState, assistant_text: str) -> StepResult:
        """Parse one assistant message, execute its calls, render responses.

        A malformed block yields an error response with done=False so the
        agent can recover; the max-turn limit still binds. A message with
        zero blocks is the agent's terminal turn.
        """
        if episode.closed:
            raise EpisodeClosedError("episode already finished")
        episode.turn_count += 1
        at_limit = episode.turn_count >= self.max_turns
        try:
            calls = parse_tool_calls(assistant_text)
        except ParseError as exc:
            error = Observation.failure(ErrorCode.PARSE_ERROR, str(exc))
            if at_limit:
                episode.closed = True
            return StepResult(render_tool_response(error), (), at_limit)
        if not calls:
            episode.closed = True
            return StepResult("", (), True)
        responses = []
        for call in calls:
            observation = self.execute(call)
            episode.transcript.append((call, observation))
            responses.append(render_tool_response(observation))
        episode.turn_sizes.append(len(calls))
        if at_limit:
            episode.closed = True
        return StepResult("\n".join(responses), tuple(calls), at_limit)


def replay_ground_truth(env: Environment, sample: DatasetSample) -> EpisodeState:
    """Drive an episode with the sample's own ground truth, turn by turn.

    Exercises the full text protocol; over a closure-complete cache the
    resulting transcript contains zero error observations.
    """
    episode = env.open_episode(sample)
    for turn_calls in sample.ground_truth.turns():
        env.step(episode, render_tool_calls(turn_calls))
    if not episode.closed:
        env.step(episode, "Done.")
    return episode
