"""Template-based explanation of a policy's nominal route.

Selects route states by locality and specificity, picks vocabulary by
corpus, and instantiates one sentence per selected state along the
traversal: "The robot <action> in <state>."
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import EmptySelectionError, SegmentNotOnRouteError
from .map_model import CRITICAL_KINDS, CellKind, GridMap, Mdp, MoveAction
from .planner import Policy, Route, extract_route
from .preference import (
    Corpus,
    Global,
    Locality,
    OnlyKind,
    PreferenceTuple,
    Segment,
    Specificity,
)

SENTENCE_TEMPLATE = "The robot {action} in {state}."

_HIGH_LEVEL_STATE = {
    CellKind.START: "the start",
    CellKind.LANDMARK: "the landmark",
    CellKind.DESTINATION: "the destination",
    CellKind.CROWDED: "the crowded passage",
    CellKind.CORRIDOR: "the corridor",
}


@dataclass(frozen=True)
class Vocabulary:
    state_phrase: Callable[[int], str]
    action_phrase: Callable[[int, MoveAction], str]


def find_corpus(corpus: Corpus, grid: GridMap) -> Vocabulary:
    """Vocabulary for the chosen corpus.

    Concrete speaks in grid indices and compass verbs; high-level speaks in
    landmark names and passage descriptions, choosing the passage phrase by
    the kind of the intended successor cell.
    """
    if corpus is Corpus.CONCRETE:

        def state_phrase(state: int) -> str:
            return f"grid {state}"

        def action_phrase(state: int, action: MoveAction) -> str:
            if action is MoveAction.STOP:
                return "stops"
            return f"moves {action.value}"

    else:

        def state_phrase(state: int) -> str:
            return _HIGH_LEVEL_STATE[grid.kind(state)]

        def action_phrase(state: int, action: MoveAction) -> str:
            if action is MoveAction.STOP:
                return "stops"
            successor = grid.step(state, action)
            assert successor is not None
            if grid.kind(successor) is CellKind.CROWDED:
                return "moves through the crowded passage"
            return "moves along the corridor"

    return Vocabulary(state_phrase=state_phrase, action_phrase=action_phrase)


@dataclass(frozen=True)
class ExplanationSentence:
    text: str
    state: int
    action: MoveAction


@dataclass(frozen=True)
class Explanation:
    sentences: tuple[ExplanationSentence, ...]
    preference: PreferenceTuple
    route_states: tuple[int, ...]

    @property
    def provenance(self) -> tuple[tuple[int, MoveAction], ...]:
        return tuple((s.state, s.action) for s in self.sentences)

    @property
    def texts(self) -> tuple[str, ...]:
        return tuple(s.text for s in self.sentences)


def find_states(
    route: Route,
    grid: GridMap,
    locality: Locality,
    specificity: Specificity,
) -> list[int]:
    """Route states passing both the locality and the specificity filter.

    Under an OnlyKind locality, critical states (start, landmark,
    destination) are retained so question-answering stays anchored. A
    Segment selects the contiguous sub-route from the first state of the
    from-kind to the first subsequent state of the to-kind, inclusive.
    """
    states = list(route.states)

    if isinstance(locality, Global):
        selected = states
    elif isinstance(locality, OnlyKind):
        selected = [
            s
            for s in states
            if grid.kind(s) is locality.kind or grid.kind(s) in CRITICAL_KINDS
        ]
    elif isinstance(locality, Segment):
        try:
            first = next(i for i, s in enumerate(states) if grid.kind(s) is locality.from_kind)
        except StopIteration:
            raise SegmentNotOnRouteError(
                f"route has no {locality.from_kind.value} state"
            ) from None
        try:
            last = next(
                i
                for i, s in enumerate(states)
                if i > first and grid.kind(s) is locality.to_kind
            )
        except StopIteration:
            raise SegmentNotOnRouteError(
                f"route has no {locality.to_kind.value} state after the first "
                f"{locality.from_kind.value}"
            ) from None
        selected = states[first : last + 1]
    else:
        selected = [s for s in states if s == locality.state]

    if specificity is Specificity.CRITICAL_ONLY:
        selected = [s for s in selected if grid.kind(s) in CRITICAL_KINDS]

    if not selected:
        raise EmptySelectionError("filters exclude every route state")
    return selected


def generate_explanation(mdp: Mdp, policy: Policy, preference: PreferenceTuple) -> Explanation:
    """Instantiate template sentences along the policy's nominal traversal."""
    route = extract_route(policy, mdp)
    grid = mdp.grid
    selected = set(find_states(route, grid, preference.locality, preference.specificity))
    vocabulary = find_corpus(preference.corpus, grid)

    sentences = tuple(
        ExplanationSentence(
            text=SENTENCE_TEMPLATE.format(
                action=vocabulary.action_phrase(state, action),
                state=vocabulary.state_phrase(state),
            ),
            state=state,
            action=action,
        )
        for state, action in route.steps
        if state in selected
    )
    return Explanation(
        sentences=sentences,
        preference=preference,
        route_states=route.states,
    )
