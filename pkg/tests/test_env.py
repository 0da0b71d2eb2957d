from __future__ import annotations

import pytest

from orchenv.canon import canonical_value
from orchenv.env import Environment, replay_ground_truth
from orchenv.errors import EpisodeClosedError
from orchenv.model import ErrorCode, ToolCall
from orchenv.protocol import render_tool_calls


@pytest.fixture()
def car_env(car_rental, mock_registry):
    return Environment(car_rental.store(), mock_registry)


def test_execute_serves_cached_observation(car_rental, car_env):
    call_3, obs_3 = car_rental.entries[2]
    served = car_env.execute(call_3)
    assert served == obs_3
    assert served.payload["packages"]


def test_execute_cache_miss(car_env):
    call = ToolCall("Get_Packages", {"vehicle_id": "000", "search_key": "k"})
    obs = car_env.execute(call)
    assert obs.is_error and obs.error.code is ErrorCode.CACHE_MISS


def test_execute_unknown_function(car_env):
    obs = car_env.execute(ToolCall("Nonexistent_Fn", {}))
    assert obs.is_error and obs.error.code is ErrorCode.UNKNOWN_FUNCTION


def test_execute_validation_failure(car_env):
    call = ToolCall("Search_Hotels", {"dest_id": "-1"})
    obs = car_env.execute(call)
    assert obs.is_error and obs.error.code is ErrorCode.VALIDATION_FAILED
    assert "arrival_date" in obs.error.message


def test_step_serves_first_turn(car_rental, car_env):
    episode = car_env.open_episode(car_rental.sample)
    text = render_tool_calls([car_rental.entries[0][0]])
    result = car_env.step(episode, text)
    assert not result.done
    assert "32.87" in result.responses_text and "-117.22" in result.responses_text
    assert episode.turn_count == 1
    assert len(episode.transcript) == 1


def test_step_plain_text_terminates(car_rental, car_env):
    episode = car_env.open_episode(car_rental.sample)
    result = car_env.step(episode, "All done, here is your summary.")
    assert result.done and result.responses_text == "" and result.calls == ()
    assert episode.closed


def test_parallel_blocks_one_turn(city_break, mock_registry):
    env = Environment(city_break.store(), mock_registry)
    episode = env.open_episode(city_break.sample)
    first_turn = city_break.sample.ground_truth.turns()[0]
    assert len(first_turn) == 2
    result = env.step(episode, render_tool_calls(first_turn))
    assert len(episode.transcript) == 2
    assert episode.turn_count == 1
    assert not result.done
    assert episode.predicted_turns() == [first_turn]


def test_parse_error_is_recoverable(car_rental, car_env):
    episode = car_env.open_episode(car_rental.sample)
    result = car_env.step(episode, "<tool_call>{broken</tool_call>")
    assert not result.done
    assert "PARSE_ERROR" in result.responses_text
    assert episode.transcript == [] and not episode.closed
    # the agent can carry on afterwards
    good = car_env.step(episode, render_tool_calls([car_rental.entries[0][0]]))
    assert len(episode.transcript) == 1 and not good.done


def test_closed_episode_rejects_steps(car_rental, car_env):
    episode = car_env.open_episode(car_rental.sample)
    car_env.step(episode, "done")
    with pytest.raises(EpisodeClosedError):
        car_env.step(episode, "more")


def test_max_turn_limit(car_rental, mock_registry):
    env = Environment(car_rental.store(), mock_registry, max_turns=2)
    episode = env.open_episode(car_rental.sample)
    text = render_tool_calls([car_rental.entries[0][0]])
    assert not env.step(episode, text).done
    assert env.step(episode, text).done
    assert episode.closed


def test_bad_calls_do_not_abort_episode(car_rental, car_env):
    episode = car_env.open_episode(car_rental.sample)
    result = car_env.step(
        episode, render_tool_calls([ToolCall("Nonexistent_Fn", {})])
    )
    assert not result.done
    assert "UNKNOWN_FUNCTION" in result.responses_text
    assert len(episode.transcript) == 1


def test_replay_ground_truth_clean(car_rental, city_break, mock_registry):
    for bundle in (car_rental, city_break):
        env = Environment(bundle.store(), mock_registry)
        episode = replay_ground_truth(env, bundle.sample)
        assert len(episode.transcript) == len(bundle.sample.ground_truth.calls)
        assert not any(obs.is_error for _, obs in episode.transcript)
        assert episode.closed


def test_episode_determinism(car_rental, mock_registry):
    texts = [
        render_tool_calls([call]) for call, _ in car_rental.entries
    ] + ["That's everything."]

    def run():
        env = Environment(car_rental.store(), mock_registry)
        episode = env.open_episode(car_rental.sample)
        outputs = [env.step(episode, text).responses_text for text in texts]
        transcript = [
            (canonical_value(c.to_doc()), canonical_value(o.to_doc()))
            for c, o in episode.transcript
        ]
        return outputs, transcript

    assert run() == run()
