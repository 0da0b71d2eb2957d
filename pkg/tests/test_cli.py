from __future__ import annotations

import hashlib
import json
import subprocess
import sys

import pytest

from orchenv.cli import main
from orchenv.datafiles import load_dataset, save_predictions


def _digest(path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A built cache + registry + synthesized dataset, shared by CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    cache = root / "cache.jsonl"
    registry = root / "registry.json"
    dataset = root / "data.jsonl"
    assert main([
        "cache", "build", "--breadth", "6", "--seed", "5",
        "--out", str(cache), "--registry-out", str(registry),
    ]) == 0
    assert main([
        "synth", "--cache", str(cache), "--registry", str(registry),
        "--per-template", "2", "--seed", "5", "--out", str(dataset),
    ]) == 0
    return root


def test_cache_build_deterministic(tmp_path):
    digests = []
    for name in ("one", "two"):
        out = tmp_path / f"{name}.jsonl"
        assert main([
            "cache", "build", "--breadth", "3", "--seed", "11", "--out", str(out),
        ]) == 0
        digests.append(_digest(out))
    assert digests[0] == digests[1]


def test_synth_deterministic(workspace, tmp_path):
    digests = []
    for name in ("one", "two"):
        out = tmp_path / f"{name}.jsonl"
        assert main([
            "synth", "--cache", str(workspace / "cache.jsonl"),
            "--registry", str(workspace / "registry.json"),
            "--per-template", "2", "--seed", "5", "--out", str(out),
        ]) == 0
        digests.append(_digest(out))
    assert digests[0] == digests[1]
    assert _digest(tmp_path / "one.jsonl") == _digest(workspace / "data.jsonl")


def test_seed_echoed_on_stderr(workspace, capsys):
    main([
        "eval", "--dataset", str(workspace / "data.jsonl"),
        "--predictions", str(workspace / "data.jsonl"),  # wrong shape on purpose
        "--seed", "99", "--format", "json",
    ])
    captured = capsys.readouterr()
    assert "seed: 99" in captured.err


def _perfect_predictions(workspace, tmp_path):
    samples = load_dataset(workspace / "data.jsonl")
    episodes = [sample.ground_truth.turns() for sample in samples]
    path = tmp_path / "predictions.jsonl"
    save_predictions(episodes, path)
    return path, len(samples)


def test_eval_perfect_replay_reports_full_accuracy(workspace, tmp_path, capsys):
    predictions, _ = _perfect_predictions(workspace, tmp_path)
    assert main([
        "eval", "--dataset", str(workspace / "data.jsonl"),
        "--predictions", str(predictions), "--format", "json",
    ]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["turn_acc"] == 1.0
    assert report["call_acc"] == 1.0


def test_eval_table_output(workspace, tmp_path, capsys):
    predictions, _ = _perfect_predictions(workspace, tmp_path)
    assert main([
        "eval", "--dataset", str(workspace / "data.jsonl"),
        "--predictions", str(predictions),
    ]) == 0
    out = capsys.readouterr().out
    assert "turn accuracy: 100.0%" in out
    assert "strata" in out


def test_score_perfect_replay(workspace, tmp_path, capsys):
    predictions, n = _perfect_predictions(workspace, tmp_path)
    out_file = tmp_path / "scores.jsonl"
    assert main([
        "score", "--dataset", str(workspace / "data.jsonl"),
        "--predictions", str(predictions),
        "--cache", str(workspace / "cache.jsonl"),
        "--registry", str(workspace / "registry.json"),
        "--out", str(out_file),
    ]) == 0
    lines = [json.loads(l) for l in out_file.read_text().splitlines()]
    assert len(lines) == n + 1
    for line in lines[:-1]:
        assert line["report"]["r_total"] == 1.0
    assert lines[-1]["aggregate"]["r_total"] == 1.0


def test_bench_reports_throughput(capsys):
    assert main([
        "bench", "--entries", "2000", "--lookups", "5000", "--rewards", "300",
        "--seed", "1",
    ]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["entries"] >= 2000
    assert report["lookups_per_sec"] > 0
    assert report["reward_evals_per_sec"] > 0


def test_missing_cache_is_structured_error(tmp_path, capsys):
    rc = main([
        "synth", "--cache", str(tmp_path / "nope.jsonl"),
        "--per-template", "1", "--seed", "0", "--out", str(tmp_path / "d.jsonl"),
    ])
    assert rc == 1
    err_lines = [l for l in capsys.readouterr().err.splitlines() if l.startswith("{")]
    assert json.loads(err_lines[-1])["error"] == "OSError"


def test_serve_stdio_subprocess(workspace):
    requests = [
        {"kind": "hello", "session_id": "cli", "body": {}},
        {"kind": "reset", "session_id": "cli", "body": {"dataset_index": 0}},
        {"kind": "step", "session_id": "cli", "body": {"assistant_text": "done"}},
        {"kind": "score", "session_id": "cli", "body": {}},
        {"kind": "close", "session_id": "cli", "body": {}},
    ]
    proc = subprocess.run(
        [sys.executable, "-m", "orchenv.cli",
         "serve", "--stdio",
         "--cache", str(workspace / "cache.jsonl"),
         "--registry", str(workspace / "registry.json"),
         "--dataset", str(workspace / "data.jsonl")],
        input="\n".join(json.dumps(r) for r in requests) + "\n",
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    replies = [json.loads(line) for line in proc.stdout.splitlines()]
    assert [r["kind"] for r in replies] == ["ack"] * 5
    assert replies[1]["body"]["query"]
    assert replies[3]["body"]["reward"]["r_atomic"] == 0.0
