"""Command-line interface: cache build, synth, score, eval, serve, bench.

Every subcommand accepts ``--seed`` and prints it, so any artifact a
command writes can be reproduced from its logged invocation. Failures
exit nonzero with a single structured error line on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import bench as benchmod
from .builtin import builtin_templates
from .cache import build_index, expand_workflow, CacheStore, load_snapshot, save_snapshot
from .datafiles import load_dataset, load_predictions, save_dataset
from .env import Environment
from .errors import OrchenvError
from .evaluate import evaluate_dataset
from .model import ToolCall
from .rewards import score_total
from .service import SessionServer, ServiceConfig
from .synth import FallbackGenerator, SubprocessGenerator, synthesize_dataset
from .templates import dependency_edges, load_registry, load_templates, save_registry
from .upstream import MockUpstream


def _setup_logging() -> None:
    level = os.environ.get("ORCHENV_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _templates_from(args) -> list:
    if args.templates:
        return load_templates(args.templates)
    return builtin_templates()


def _print_seed(seed: int) -> None:
    print(f"seed: {seed}", file=sys.stderr)


def _cmd_cache_build(args) -> int:
    _print_seed(args.seed)
    if args.upstream != "mock":
        raise OrchenvError(f"unknown upstream {args.upstream!r}")
    upstream = MockUpstream()
    templates = _templates_from(args)
    store = CacheStore()
    for template in sorted(templates, key=lambda t: t.id):
        expand_workflow(template, upstream, store, args.breadth, args.seed)
    store.freeze()
    save_snapshot(store, args.out)
    if args.registry_out:
        save_registry(upstream.registry(), args.registry_out)
    print(json.dumps({"entries": len(store), "out": args.out, "seed": args.seed}))
    return 0


def _cmd_synth(args) -> int:
    _print_seed(args.seed)
    store = load_snapshot(args.cache)
    index = build_index(store)
    templates = _templates_from(args)
    registry = load_registry(args.registry) if args.registry else None
    if args.generator == "fallback":
        generator = FallbackGenerator()
    elif args.generator.startswith("exec:"):
        generator = SubprocessGenerator(args.generator[len("exec:"):].split())
    else:
        raise OrchenvError(f"unknown generator {args.generator!r}")
    samples, report = synthesize_dataset(
        templates, store, index, generator, args.per_template, args.seed,
        registry=registry,
    )
    save_dataset(samples, args.out)
    report_doc = report.to_doc()
    report_doc["seed"] = args.seed
    if args.report:
        Path(args.report).write_text(json.dumps(report_doc, indent=1, sort_keys=True) + "\n")
    print(json.dumps(report_doc, sort_keys=True))
    return 0


def _load_environment(args) -> tuple:
    store = load_snapshot(args.cache)
    registry = load_registry(args.registry) if args.registry else None
    templates = {t.id: t for t in _templates_from(args)}
    return store, registry, templates


def _replay_episode(env: Environment, turns: list[list[ToolCall]]):
    transcript = []
    for turn in turns:
        for call in turn:
            transcript.append((call, env.execute(call)))
    return transcript


def _cmd_score(args) -> int:
    _print_seed(args.seed)
    store, registry, templates = _load_environment(args)
    env = Environment(store, registry)
    samples = load_dataset(args.dataset)
    episodes = load_predictions(args.predictions, len(samples))
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    totals = {"r_atomic": 0.0, "r_orch": 0.0, "r_total": 0.0}
    try:
        for sample_id, (sample, turns) in enumerate(zip(samples, episodes)):
            template = templates.get(sample.ground_truth.template_id)
            if template is None:
                raise OrchenvError(
                    f"template {sample.ground_truth.template_id!r} not found"
                )
            pred = [c for turn in turns for c in turn]
            transcript = _replay_episode(env, turns)
            report = score_total(
                pred, sample.ground_truth, transcript,
                dependency_edges(template), lam=args.reward_lambda, registry=registry,
            )
            for k in totals:
                totals[k] += getattr(report, k)
            doc = {"sample_id": sample_id, "report": report.to_doc()}
            out.write(json.dumps(doc, sort_keys=True) + "\n")
        n = max(len(samples), 1)
        aggregate = {
            "aggregate": {k: v / n for k, v in totals.items()},
            "n_samples": len(samples),
            "seed": args.seed,
        }
        out.write(json.dumps(aggregate, sort_keys=True) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_eval(args) -> int:
    _print_seed(args.seed)
    samples = load_dataset(args.dataset)
    episodes = load_predictions(args.predictions, len(samples))
    templates = {t.id: t for t in _templates_from(args)}
    report = evaluate_dataset(samples, episodes, templates)
    if args.format == "json":
        print(json.dumps(report.to_doc(), indent=1, sort_keys=True))
    else:
        _print_eval_table(report)
    return 0


def _print_eval_table(report) -> None:
    print(f"samples: {report.n_samples}")
    print(f"turn accuracy: {report.turn_acc * 100:.1f}%")
    print(f"call accuracy: {report.call_acc * 100:.1f}%")
    if report.strata:
        print("\nstrata                         count   turn acc")
        for label in sorted(report.strata):
            s = report.strata[label]
            print(f"  {label:<28} {s.count:>5}   {s.turn_acc * 100:>6.1f}%")
    e = report.errors
    print("\nerror breakdown")
    print(f"  call level: function selection {e.function_selection_err * 100:.1f}%, "
          f"parameters {e.parameter_err * 100:.1f}%")
    print(f"  parameter level: query-derived {e.query_param_err * 100:.1f}%, "
          f"dependency-derived {e.dependency_param_err * 100:.1f}%")
    print(f"  sequence level: stopped after correct {e.stopped_after_correct * 100:.1f}%, "
          f"after function error {e.stopped_after_func_err * 100:.1f}%, "
          f"after parameter error {e.stopped_after_param_err * 100:.1f}%")


def _cmd_serve(args) -> int:
    _print_seed(args.seed)
    config = (
        ServiceConfig.from_file(args.config) if args.config else ServiceConfig()
    )
    if args.reward_lambda is not None:
        config.lam = args.reward_lambda
    if args.max_turns is not None:
        config.max_turns = args.max_turns
    config.seed = args.seed

    store, registry, templates = _load_environment(args)
    if registry is None:
        raise OrchenvError("serve requires --registry")
    samples = load_dataset(args.dataset)
    server = SessionServer(
        store, registry, templates, samples,
        lam=config.lam, max_turns=config.max_turns, seed=args.seed,
    )
    if args.stdio:
        server.serve_stdio()
        return 0
    tcp = server.serve_tcp(args.host, args.port)
    host, port = tcp.server_address[:2]
    print(json.dumps({"listening": f"{host}:{port}", "seed": args.seed}), flush=True)
    try:
        tcp.serve_forever()  # pragma: no cover - interactive
    except KeyboardInterrupt:  # pragma: no cover
        tcp.shutdown()
    return 0


def _cmd_bench(args) -> int:
    _print_seed(args.seed)
    store = load_snapshot(args.cache) if args.cache else None
    result = benchmod.run_benchmark(
        store=store,
        target_entries=args.entries,
        lookups=args.lookups,
        rewards=args.rewards,
        seed=args.seed,
    )
    print(json.dumps(result, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orchenv",
        description="Deterministic environment, synthesis, and rewards for "
                    "multi-step tool orchestration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cache = sub.add_parser("cache", help="cache operations")
    cache_sub = cache.add_subparsers(dest="cache_command", required=True)
    cb = cache_sub.add_parser("build", help="expand templates into a snapshot")
    cb.add_argument("--upstream", default="mock")
    cb.add_argument("--templates", help="template directory (default: builtin)")
    cb.add_argument("--breadth", type=int, default=25)
    cb.add_argument("--seed", type=int, default=0)
    cb.add_argument("--out", required=True)
    cb.add_argument("--registry-out", help="also write the function registry here")
    cb.set_defaults(func=_cmd_cache_build)

    synth = sub.add_parser("synth", help="synthesize a dataset from a cache")
    synth.add_argument("--templates", help="template directory (default: builtin)")
    synth.add_argument("--cache", required=True)
    synth.add_argument("--registry", help="registry file for replay validation")
    synth.add_argument("--per-template", type=int, default=3)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--generator", default="fallback",
                       help="'fallback' or 'exec:CMD ARGS...'")
    synth.add_argument("--out", required=True)
    synth.add_argument("--report", help="write the synthesis report here")
    synth.set_defaults(func=_cmd_synth)

    score = sub.add_parser("score", help="reward-score a predictions file")
    score.add_argument("--dataset", required=True)
    score.add_argument("--predictions", required=True)
    score.add_argument("--cache", required=True)
    score.add_argument("--registry")
    score.add_argument("--templates")
    score.add_argument("--lambda", dest="reward_lambda", type=float, default=0.5)
    score.add_argument("--seed", type=int, default=0)
    score.add_argument("--out")
    score.set_defaults(func=_cmd_score)

    evalp = sub.add_parser("eval", help="benchmark-score a predictions file")
    evalp.add_argument("--dataset", required=True)
    evalp.add_argument("--predictions", required=True)
    evalp.add_argument("--templates")
    evalp.add_argument("--format", choices=("json", "table"), default="table")
    evalp.add_argument("--seed", type=int, default=0)
    evalp.set_defaults(func=_cmd_eval)

    serve = sub.add_parser("serve", help="serve the session protocol")
    serve.add_argument("--cache", required=True)
    serve.add_argument("--registry", required=True)
    serve.add_argument("--templates")
    serve.add_argument("--dataset", required=True)
    serve.add_argument("--config", help="JSON file overriding service defaults")
    serve.add_argument("--lambda", dest="reward_lambda", type=float, default=None)
    serve.add_argument("--max-turns", type=int, default=None)
    serve.add_argument("--seed", type=int, default=0)
    serve.add_argument("--stdio", action="store_true",
                       help="serve one connection on stdin/stdout")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=0)
    serve.set_defaults(func=_cmd_serve)

    benchp = sub.add_parser("bench", help="measure lookup and scoring throughput")
    benchp.add_argument("--cache", help="snapshot to load (default: build a mock)")
    benchp.add_argument("--entries", type=int, default=100_000)
    benchp.add_argument("--lookups", type=int, default=200_000)
    benchp.add_argument("--rewards", type=int, default=10_000)
    benchp.add_argument("--seed", type=int, default=0)
    benchp.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OrchenvError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": "OSError", "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
