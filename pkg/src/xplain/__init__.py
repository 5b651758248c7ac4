"""Grid-world route planning with personalized, template-based explanations."""

from .assets import PAPER_MAP_ID, PAPER_MAP_TEXT, paper_map
from .dialogue import (
    Answer,
    Question,
    Session,
    SessionConfig,
    SessionState,
    TranscriptEvent,
    parse_transcript,
    replay_session,
    start_session,
)
from .explainer import (
    Explanation,
    ExplanationSentence,
    Vocabulary,
    find_corpus,
    find_states,
    generate_explanation,
)
from .map_model import (
    CellKind,
    GridMap,
    Mdp,
    MoveAction,
    build_mdp,
    parse_map,
    serialize_map,
)
from .planner import (
    Objective,
    Policy,
    Route,
    RouteMetrics,
    extract_route,
    plan_policy,
    route_metrics,
)
from .preference import (
    AtPosition,
    ConflictKind,
    Corpus,
    Global,
    OnlyKind,
    PreferenceTuple,
    Segment,
    Specificity,
    classify_conflict,
    preference_from_dict,
    preference_to_dict,
    validate_preference,
)

__all__ = [
    "PAPER_MAP_ID",
    "PAPER_MAP_TEXT",
    "paper_map",
    "Answer",
    "Question",
    "Session",
    "SessionConfig",
    "SessionState",
    "TranscriptEvent",
    "parse_transcript",
    "replay_session",
    "start_session",
    "Explanation",
    "ExplanationSentence",
    "Vocabulary",
    "find_corpus",
    "find_states",
    "generate_explanation",
    "CellKind",
    "GridMap",
    "Mdp",
    "MoveAction",
    "build_mdp",
    "parse_map",
    "serialize_map",
    "Objective",
    "Policy",
    "Route",
    "RouteMetrics",
    "extract_route",
    "plan_policy",
    "route_metrics",
    "AtPosition",
    "ConflictKind",
    "Corpus",
    "Global",
    "OnlyKind",
    "PreferenceTuple",
    "Segment",
    "Specificity",
    "classify_conflict",
    "preference_from_dict",
    "preference_to_dict",
    "validate_preference",
]

__version__ = "0.1.0"
