"""Benchmark-style scoring: strict call matching, turn/call accuracy,
complexity stratification, and the three-level error taxonomy.

Aggregate accuracies are ratio-of-sums over the dataset (total successful
turns over total turns), not means of per-sample ratios. A predicted turn
is compared to the reference turn at the same position; turn t succeeds
only if every reference call of turn t has a strict-match counterpart in
predicted turn t, and the per-sample count is the maximal successful
prefix — an early failure forfeits everything after it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .canon import args_equal
from .model import DatasetSample, GroundTruth, ToolCall
from .templates import WorkflowTemplate, dependency_edges, dependency_param_names

PredTurns = Sequence[Sequence[ToolCall]]


def match_call(pred: ToolCall, gt: ToolCall) -> bool:
    """Strict match: same function name and canonically equal arguments."""
    return pred.function == gt.function and args_equal(pred.args, gt.args)


def turn_accuracy(pred_turns: PredTurns, gt: GroundTruth) -> tuple[int, int]:
    """(consecutive successful turns from the start, total reference turns).

    Within a turn order is ignored and every reference call must be
    matched by a distinct predicted call; extra predicted calls in a turn
    do not hurt.
    """
    gt_turns = gt.turns()
    n_succ = 0
    for t, gt_calls in enumerate(gt_turns):
        predicted = list(pred_turns[t]) if t < len(pred_turns) else []
        used = [False] * len(predicted)
        ok = True
        for gt_call in gt_calls:
            found = False
            for k, pred_call in enumerate(predicted):
                if not used[k] and match_call(pred_call, gt_call):
                    used[k] = True
                    found = True
                    break
            if not found:
                ok = False
                break
        if not ok:
            break
        n_succ += 1
    return n_succ, len(gt_turns)


def call_accuracy(pred: Sequence[ToolCall], gt: GroundTruth) -> tuple[int, int]:
    """(strictly matched calls, total reference calls), greedy in order."""
    remaining = gt.flat_calls()
    consumed = [False] * len(remaining)
    matched = 0
    for pred_call in pred:
        for j, gt_call in enumerate(remaining):
            if not consumed[j] and match_call(pred_call, gt_call):
                consumed[j] = True
                matched += 1
                break
    return matched, len(remaining)


@dataclass(frozen=True)
class Strata:
    depth: int
    pattern: str  # "linear" | "fan_out"
    logic: Optional[str]


def stratify(sample: DatasetSample, template: WorkflowTemplate) -> Strata:
    """Complexity labels: longest dependency chain, branch shape, and the
    logical-composition label when the sample metadata carries one."""
    edges = dependency_edges(template)
    n = len(template.pattern)
    children: dict[int, int] = {}
    has_parent = [False] * n
    adjacency: dict[int, list[int]] = {}
    for j, i in edges:
        children[j] = children.get(j, 0) + 1
        has_parent[i] = True
        adjacency.setdefault(j, []).append(i)

    depth_memo: dict[int, int] = {}

    def longest_from(node: int) -> int:
        if node in depth_memo:
            return depth_memo[node]
        best = 0
        for nxt in adjacency.get(node, ()):
            best = max(best, 1 + longest_from(nxt))
        depth_memo[node] = best
        return best

    depth = max((longest_from(i) for i in range(n)), default=0)
    roots = sum(1 for i in range(n) if not has_parent[i])
    fan_out = roots >= 2 or any(c >= 2 for c in children.values())
    logic = sample.metadata.get("logic")
    return Strata(
        depth=depth,
        pattern="fan_out" if fan_out else "linear",
        logic=str(logic) if logic is not None else None,
    )


@dataclass(frozen=True)
class ErrorBreakdown:
    """Failure rates at call, parameter, and sequence level.

    Call-level rates are over produced calls; parameter-level rates are
    conditional on a correct function name; sequence-level fractions are
    over all samples and mutually exclusive per incomplete sample
    (samples that produced no calls at all fall in no bucket).
    """

    function_selection_err: float
    parameter_err: float
    query_param_err: float
    dependency_param_err: float
    stopped_after_correct: float
    stopped_after_func_err: float
    stopped_after_param_err: float

    def to_doc(self) -> dict:
        return {
            "call_level": {
                "function_selection_err": self.function_selection_err,
                "parameter_err": self.parameter_err,
            },
            "parameter_level": {
                "query_param_err": self.query_param_err,
                "dependency_param_err": self.dependency_param_err,
            },
            "sequence_level": {
                "stopped_after_correct": self.stopped_after_correct,
                "stopped_after_func_err": self.stopped_after_func_err,
                "stopped_after_param_err": self.stopped_after_param_err,
            },
        }


@dataclass(frozen=True)
class _CallRecord:
    kind: str  # "correct" | "param_err" | "func_err"
    gt_index: Optional[int]


def _classify_calls(pred: Sequence[ToolCall], gt_calls: Sequence[ToolCall]) -> list[_CallRecord]:
    consumed = [False] * len(gt_calls)
    records = []
    for call in pred:
        exact = next(
            (j for j, g in enumerate(gt_calls)
             if not consumed[j] and match_call(call, g)),
            None,
        )
        if exact is not None:
            consumed[exact] = True
            records.append(_CallRecord("correct", exact))
            continue
        by_name = next(
            (j for j, g in enumerate(gt_calls)
             if not consumed[j] and g.function == call.function),
            None,
        )
        if by_name is not None:
            consumed[by_name] = True
            records.append(_CallRecord("param_err", by_name))
        else:
            records.append(_CallRecord("func_err", None))
    return records


def _wrong_param_kinds(
    pred_call: ToolCall,
    gt_call: ToolCall,
    dep_names: frozenset[str],
) -> tuple[bool, bool]:
    """(has wrong query param, has wrong dependency param) for one call."""
    query_wrong = dep_wrong = False
    for pname, gt_value in gt_call.args.items():
        pred_has = pname in pred_call.args
        if pred_has and args_equal({"v": pred_call.args[pname]}, {"v": gt_value}):
            continue
        if pname in dep_names:
            dep_wrong = True
        else:
            query_wrong = True
    return query_wrong, dep_wrong


def classify_errors(
    episodes: Sequence[PredTurns],
    samples: Sequence[DatasetSample],
    templates: Mapping[str, WorkflowTemplate],
) -> ErrorBreakdown:
    produced = func_errs = param_errs = 0
    correct_fn = query_err_calls = dep_err_calls = 0
    stopped_correct = stopped_func = stopped_param = 0

    for pred_turns, sample in zip(episodes, samples):
        gt = sample.ground_truth
        gt_calls = gt.flat_calls()
        template = templates.get(gt.template_id)
        flat_pred = [c for turn in pred_turns for c in turn]
        records = _classify_calls(flat_pred, gt_calls)

        produced += len(records)
        for k, record in enumerate(records):
            if record.kind == "func_err":
                func_errs += 1
                continue
            correct_fn += 1
            if record.kind == "param_err":
                param_errs += 1
                dep_names = (
                    dependency_param_names(template, record.gt_index)
                    if template is not None
                    else frozenset()
                )
                query_wrong, dep_wrong = _wrong_param_kinds(
                    flat_pred[k], gt_calls[record.gt_index], dep_names
                )
                if query_wrong:
                    query_err_calls += 1
                if dep_wrong:
                    dep_err_calls += 1

        n_succ, n_total = turn_accuracy(pred_turns, gt)
        if n_succ < n_total and records:
            last = records[-1]
            if last.kind == "correct":
                stopped_correct += 1
            elif last.kind == "func_err":
                stopped_func += 1
            else:
                stopped_param += 1

    n_samples = len(samples)
    return ErrorBreakdown(
        function_selection_err=func_errs / produced if produced else 0.0,
        parameter_err=param_errs / produced if produced else 0.0,
        query_param_err=query_err_calls / correct_fn if correct_fn else 0.0,
        dependency_param_err=dep_err_calls / correct_fn if correct_fn else 0.0,
        stopped_after_correct=stopped_correct / n_samples if n_samples else 0.0,
        stopped_after_func_err=stopped_func / n_samples if n_samples else 0.0,
        stopped_after_param_err=stopped_param / n_samples if n_samples else 0.0,
    )


@dataclass(frozen=True)
class StratumStats:
    count: int
    turn_acc: float


@dataclass(frozen=True)
class EvalReport:
    turn_acc: float
    call_acc: float
    strata: Mapping[str, StratumStats]
    errors: ErrorBreakdown
    n_samples: int

    def to_doc(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "turn_acc": self.turn_acc,
            "call_acc": self.call_acc,
            "strata": {
                label: {"count": s.count, "turn_acc": s.turn_acc}
                for label, s in sorted(self.strata.items())
            },
            "errors": self.errors.to_doc(),
        }


def evaluate_dataset(
    samples: Sequence[DatasetSample],
    episodes: Sequence[PredTurns],
    templates: Mapping[str, WorkflowTemplate],
) -> EvalReport:
    """Score a full prediction set; episodes align with samples by position."""
    if len(samples) != len(episodes):
        raise ValueError("one prediction episode required per sample")

    succ_sum = turn_sum = match_sum = call_sum = 0
    strata_succ: dict[str, int] = {}
    strata_total: dict[str, int] = {}
    strata_count: dict[str, int] = {}

    for sample, pred_turns in zip(samples, episodes):
        gt = sample.ground_truth
        n_succ, n_total = turn_accuracy(pred_turns, gt)
        matched, total = call_accuracy(
            [c for turn in pred_turns for c in turn], gt
        )
        succ_sum += n_succ
        turn_sum += n_total
        match_sum += matched
        call_sum += total

        template = templates.get(gt.template_id)
        if template is not None:
            strata = stratify(sample, template)
            labels = [f"depth:{strata.depth}", f"pattern:{strata.pattern}"]
            if strata.logic:
                labels.append(f"logic:{strata.logic}")
            for label in labels:
                strata_succ[label] = strata_succ.get(label, 0) + n_succ
                strata_total[label] = strata_total.get(label, 0) + n_total
                strata_count[label] = strata_count.get(label, 0) + 1

    return EvalReport(
        turn_acc=succ_sum / turn_sum if turn_sum else 0.0,
        call_acc=match_sum / call_sum if call_sum else 0.0,
        strata={
            label: StratumStats(
                count=strata_count[label],
                turn_acc=strata_succ[label] / strata_total[label]
                if strata_total[label]
                else 0.0,
            )
            for label in strata_count
        },
        errors=classify_errors(episodes, samples, templates),
        n_samples=len(samples),
    )
