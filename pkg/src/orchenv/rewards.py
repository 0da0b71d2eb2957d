"""Graduated reward computation for predicted call sequences.

Correctness decomposes into two complementary signals:

* a per-call atomic score, averaging a three-level structural score
  (function name, parameter structure/types, exact values — weighted
  1/3 each) with a binary execution-success score;
* an orchestration score crediting each reference step that was matched
  by name AND had every dependency predecessor matched earlier — the
  product over prerequisites acts as a strict gate.

The total blends the two with a weight ``lam`` (default 0.5):
``r_total = lam * r_atomic + (1 - lam) * r_orch``, an exact arithmetic
identity in the report. Value equality throughout is canonical-form
equality; there is no partial string credit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .canon import args_equal, json_type
from .model import GroundTruth, Observation, Registry, ToolCall, Value

WEIGHT_NAME = 1.0 / 3.0
WEIGHT_STRUCT = 1.0 / 3.0
WEIGHT_VALUES = 1.0 / 3.0


@dataclass(frozen=True)
class AlignmentMap:
    """First-match-by-function-name assignment, reference index -> predicted index.

    Injective over assigned values; a reference call that never finds an
    unclaimed name match stays unassigned.
    """

    assignments: Mapping[int, int]

    def predicted_for(self, gt_index: int) -> Optional[int]:
        return self.assignments.get(gt_index)

    def inverse(self) -> dict[int, int]:
        return {pred: gt for gt, pred in self.assignments.items()}

    def to_doc(self) -> dict:
        return {"assignments": {str(k): v for k, v in sorted(self.assignments.items())}}


@dataclass(frozen=True)
class PerCallScore:
    ast: float
    sem: int


@dataclass(frozen=True)
class RewardReport:
    per_call: tuple[PerCallScore, ...]
    r_atomic: float
    r_orch: float
    r_total: float
    lam: float
    alignment: AlignmentMap

    def to_doc(self) -> dict:
        return {
            "per_call": [{"ast": s.ast, "sem": s.sem} for s in self.per_call],
            "r_atomic": self.r_atomic,
            "r_orch": self.r_orch,
            "r_total": self.r_total,
            "lambda": self.lam,
            "alignment": self.alignment.to_doc(),
        }


def struct_score(pred_args: Mapping[str, Value], gt_args: Mapping[str, Value]) -> float:
    """Parameter coverage times type accuracy over the overlap.

    Degenerate rules: an empty reference parameter set scores 1; an empty
    overlap (with a non-empty reference) scores 0. Extra predicted
    parameters never reduce the score.
    """
    gt_names = set(gt_args)
    if not gt_names:
        return 1.0
    overlap = gt_names & set(pred_args)
    if not overlap:
        return 0.0
    coverage = len(overlap) / len(gt_names)
    type_correct = sum(
        1 for p in overlap if json_type(pred_args[p]) == json_type(gt_args[p])
    )
    return coverage * (type_correct / len(overlap))


def score_ast(pred: ToolCall, gt: Optional[ToolCall]) -> float:
    """Three-level structural score against the aligned reference call.

    Unaligned predicted calls score 0 (they matched no reference name).
    """
    if gt is None:
        return 0.0
    name_hit = 1.0 if pred.function == gt.function else 0.0
    values_hit = 1.0 if args_equal(pred.args, gt.args) else 0.0
    return (
        WEIGHT_NAME * name_hit
        + WEIGHT_STRUCT * struct_score(pred.args, gt.args)
        + WEIGHT_VALUES * values_hit
    )


def score_semantic(
    pred_index: int,
    transcript: Sequence[tuple[ToolCall, Observation]],
    registry: Optional[Registry] = None,
) -> int:
    """1 iff the call executed successfully: it produced a response, the
    response carries no error indicators, and the payload is structurally
    valid (non-empty; declared top-level fields present when a registry is
    given). Execution-based: a call that differs from the reference but
    returns valid data still scores 1.
    """
    if pred_index >= len(transcript):
        return 0
    call, obs = transcript[pred_index]
    if obs.is_error or obs.error is not None:
        return 0
    payload = obs.payload
    if payload is None:
        return 0
    if isinstance(payload, (dict, list)) and not payload:
        return 0
    if registry is not None and isinstance(payload, dict):
        schema = registry.get(call.function)
        if schema is not None and schema.response_fields:
            if not all(f in payload for f in schema.response_fields):
                return 0
    return 1


def _align(pred_names: Sequence[str], gt_names: Sequence[str]) -> dict[int, int]:
    taken: set[int] = set()
    assignments: dict[int, int] = {}
    for i, gt_name in enumerate(gt_names):
        for k, pred_name in enumerate(pred_names):
            if k not in taken and pred_name == gt_name:
                assignments[i] = k
                taken.add(k)
                break
    return assignments


def align_calls(pred: Sequence[ToolCall], gt: GroundTruth | Sequence[ToolCall]) -> AlignmentMap:
    """Scan reference calls in order; each takes the first unclaimed
    predicted call with the same function name. Parameter values are
    deliberately ignored here — they are scored by the atomic component,
    keeping the two signals orthogonal.
    """
    gt_calls = gt.flat_calls() if isinstance(gt, GroundTruth) else list(gt)
    return AlignmentMap(
        _align([c.function for c in pred], [c.function for c in gt_calls])
    )


def score_atomic(
    pred: Sequence[ToolCall],
    gt: GroundTruth,
    transcript: Sequence[tuple[ToolCall, Observation]],
    registry: Optional[Registry] = None,
) -> float:
    """Mean over predicted calls of (structural + execution) / 2."""
    if not pred:
        return 0.0
    alignment = align_calls(pred, gt)
    return _atomic_from_per_call(
        _per_call_scores(pred, gt, transcript, alignment, registry)
    )


def _per_call_scores(
    pred: Sequence[ToolCall],
    gt: GroundTruth,
    transcript: Sequence[tuple[ToolCall, Observation]],
    alignment: AlignmentMap,
    registry: Optional[Registry],
) -> list[PerCallScore]:
    gt_calls = gt.flat_calls()
    pred_to_gt = alignment.inverse()
    scores = []
    for k in range(len(pred)):
        gt_call = gt_calls[pred_to_gt[k]] if k in pred_to_gt else None
        scores.append(
            PerCallScore(
                ast=score_ast(pred[k], gt_call),
                sem=score_semantic(k, transcript, registry),
            )
        )
    return scores


def _atomic_from_per_call(per_call: Sequence[PerCallScore]) -> float:
    if not per_call:
        return 0.0
    return sum((s.ast + s.sem) / 2.0 for s in per_call) / len(per_call)


def score_orch(
    pred: Sequence[ToolCall],
    gt: GroundTruth,
    graph: Iterable[tuple[int, int]],
) -> float:
    """Fraction of reference steps matched with all prerequisites earlier.

    ``graph`` is the template's edge set (j, i) over reference call
    positions. A step whose prerequisite is unmatched or ordered after it
    gets exactly zero credit.
    """
    alignment = align_calls(pred, gt)
    return _orch_from_alignment(alignment, len(gt.flat_calls()), graph)


def _orch_from_alignment(
    alignment: AlignmentMap, n_gt: int, graph: Iterable[tuple[int, int]]
) -> float:
    prerequisites: dict[int, list[int]] = {}
    for j, i in graph:
        prerequisites.setdefault(i, []).append(j)
    credited = 0
    for i in range(n_gt):
        mu_i = alignment.predicted_for(i)
        if mu_i is None:
            continue
        ok = True
        for j in prerequisites.get(i, ()):
            mu_j = alignment.predicted_for(j)
            if mu_j is None or not mu_j < mu_i:
                ok = False
                break
        if ok:
            credited += 1
    return credited / n_gt


def score_total(
    pred: Sequence[ToolCall],
    gt: GroundTruth,
    transcript: Sequence[tuple[ToolCall, Observation]],
    graph: Iterable[tuple[int, int]],
    lam: float = 0.5,
    registry: Optional[Registry] = None,
) -> RewardReport:
    """Assemble the full per-call and aggregate reward report."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    alignment = align_calls(pred, gt)
    per_call = _per_call_scores(pred, gt, transcript, alignment, registry)
    r_atomic = _atomic_from_per_call(per_call)
    r_orch = _orch_from_alignment(alignment, len(gt.flat_calls()), graph)
    return RewardReport(
        per_call=tuple(per_call),
        r_atomic=r_atomic,
        r_orch=r_orch,
        r_total=lam * r_atomic + (1.0 - lam) * r_orch,
        lam=lam,
        alignment=alignment,
    )
