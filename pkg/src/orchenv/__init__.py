"""Deterministic environment, constrained data synthesis, graduated rewards,
and evaluation for multi-step tool orchestration."""

from .canon import canonical_key, canonical_value, derive_seed, values_equal
from .cache import (
    CacheEntry,
    CacheStore,
    build_cache,
    build_index,
    expand_workflow,
    index_query,
    InvertedIndex,
    load_snapshot,
    save_snapshot,
)
from .env import Environment, EpisodeState, StepResult, replay_ground_truth
from .errors import (
    ClosureError,
    ConflictError,
    CycleError,
    EpisodeClosedError,
    ExhaustedError,
    GeneratorError,
    OrchenvError,
    ParseError,
    PathNotFound,
    PathSyntaxError,
    SchemaError,
    UpstreamError,
)
from .evaluate import (
    EvalReport,
    ErrorBreakdown,
    call_accuracy,
    classify_errors,
    evaluate_dataset,
    match_call,
    stratify,
    turn_accuracy,
)
from .model import (
    Constraint,
    ConstraintKind,
    DatasetSample,
    DependencyBinding,
    ErrorCode,
    FunctionSchema,
    GroundTruth,
    Observation,
    ParamSpec,
    ParamType,
    Provenance,
    StepDependencies,
    ToolCall,
    WorkflowTemplate,
)
from .paths import PathExpr, extract, extract_value, parse_path
from .protocol import parse_tool_calls, render_tool_calls, render_tool_response
from .rewards import (
    AlignmentMap,
    RewardReport,
    align_calls,
    score_ast,
    score_atomic,
    score_orch,
    score_semantic,
    score_total,
    struct_score,
)
from .synth import (
    FallbackGenerator,
    QueryDraft,
    SubprocessGenerator,
    Trace,
    build_ground_truth,
    generate_query,
    sample_trace,
    synthesize_dataset,
    verify_echo_back,
)
from .templates import (
    dependency_edges,
    load_registry,
    load_templates,
    parse_registry,
    parse_template,
    save_registry,
    serialize_template,
    turn_levels,
)
from .upstream import MockUpstream, build_mock_cache, build_mock_registry
from .validators import ValidationResult, Validator, Violation, validate_args

__version__ = "0.1.0"
