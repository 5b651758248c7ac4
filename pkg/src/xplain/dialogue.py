"""Interactive session loop: question answering, preference updates,
conflict confirmation, finalization.

Sessions are event-sourced: every public operation validates its inputs,
appends transcript events, and mutates state only by applying those events
through the same reducer used for replay. Replaying a transcript therefore
reconstructs the live session exactly.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .errors import (
    EmptySelectionError,
    EventLimitExceededError,
    NotInExplanationError,
    PreferenceInvalidError,
    SegmentNotOnRouteError,
    WrongStateError,
)
from .explainer import Explanation, find_corpus, generate_explanation
from .map_model import GridMap, Mdp, MoveAction, build_mdp
from .planner import (
    DEFAULT_DISCOUNT,
    DEFAULT_ITERATION_CAP,
    DEFAULT_TOLERANCE,
    Policy,
    Route,
    RouteMetrics,
    extract_route,
    plan_policy,
    route_metrics,
)
from .preference import (
    ConflictKind,
    PreferenceTuple,
    Violation,
    classify_conflict,
    preference_from_dict,
    preference_to_dict,
    validate_preference,
)

QUESTION_TEMPLATE = "Why does the robot {action} rather than take a different action in {state}?"
# The objective phrase carries its article ("the shortest route").
ANSWER_TEMPLATE = (
    "The robot {action} in {state}, because it is part of the optimal robotic plan "
    "to achieve {objective}, while taking a different action in {state} cannot "
    "guarantee {objective}."
)


def _question_verb(action_phrase: str) -> str:
    """Third-person phrase to the bare form used after "does the robot"."""
    head, _, rest = action_phrase.partition(" ")
    bare = {"moves": "move", "stops": "stop"}.get(head, head)
    return f"{bare} {rest}".strip()

PROMPTS = {
    ConflictKind.SOFT: "Do you want to view a different explanation of the same robotic plan?",
    ConflictKind.HARD: "Do you want to update the planning objective?",
    ConflictKind.NONE: "Do you confirm that you have finished updating your preferences?",
}


# plan_policy is pure, so identical (map, motion model, objective, solver
# settings) inputs share one Policy object across sessions.
_POLICY_CACHE: dict = {}
_POLICY_CACHE_LOCK = threading.Lock()
_POLICY_CACHE_CAP = 512


class SessionState(Enum):
    AWAITING_PREFERENCE = "awaiting_preference"
    PLANNED = "planned"
    EXPLAINED = "explained"
    AWAITING_SOFT_CONFIRM = "awaiting_soft_confirm"
    AWAITING_HARD_CONFIRM = "awaiting_hard_confirm"
    AWAITING_DONE_CONFIRM = "awaiting_done_confirm"
    FINALIZED = "finalized"


_AWAITING = (
    SessionState.AWAITING_SOFT_CONFIRM,
    SessionState.AWAITING_HARD_CONFIRM,
    SessionState.AWAITING_DONE_CONFIRM,
)


class EventKind(Enum):
    PREFERENCE_SET = "preference_set"
    EXPLAINED = "explained"
    QUESTION_ASKED = "question_asked"
    CONFLICT_DETECTED = "conflict_detected"
    CONFIRM_YES = "confirm_yes"
    CONFIRM_NO = "confirm_no"
    FINALIZED = "finalized"


@dataclass(frozen=True)
class TranscriptEvent:
    seq: int
    timestamp: float
    kind: EventKind
    payload: dict

    def as_dict(self) -> dict:
        return {
            "seq": self.seq,
            "ts": self.timestamp,
            "kind": self.kind.value,
            "payload": self.payload,
        }

    @staticmethod
    def from_dict(data: dict) -> "TranscriptEvent":
        return TranscriptEvent(
            seq=int(data["seq"]),
            timestamp=float(data["ts"]),
            kind=EventKind(data["kind"]),
            payload=dict(data.get("payload", {})),
        )


@dataclass(frozen=True)
class Question:
    state: int
    action: MoveAction


@dataclass(frozen=True)
class Answer:
    text: str
    question: str


@dataclass(frozen=True)
class UpdatePrompt:
    conflict: ConflictKind
    prompt: str


@dataclass(frozen=True)
class SessionConfig:
    slip_probability: float = 0.2
    discount: float = DEFAULT_DISCOUNT
    tolerance: float = DEFAULT_TOLERANCE
    iteration_cap: int = DEFAULT_ITERATION_CAP
    # Abuse guard only; the dialogue itself allows unlimited update rounds.
    event_limit: int = 10_000


class Session:
    """One user's dialogue; operations are serialized by an internal lock."""

    def __init__(
        self,
        grid: GridMap,
        *,
        session_id: Optional[str] = None,
        config: Optional[SessionConfig] = None,
        clock: Optional[Callable[[], float]] = None,
    ) -> None:
        self.id = session_id or uuid.uuid4().hex[:12]
        self.grid = grid
        self.config = config or SessionConfig()
        self.mdp: Mdp = build_mdp(grid, self.config.slip_probability)
        self.preference: Optional[PreferenceTuple] = None
        self.pending_preference: Optional[PreferenceTuple] = None
        self.policy: Optional[Policy] = None
        self.explanation: Optional[Explanation] = None
        self.state = SessionState.AWAITING_PREFERENCE
        self.transcript: list[TranscriptEvent] = []
        self._must_differ = False
        self._clock = clock or time.time
        self._lock = threading.RLock()

    # -- construction ------------------------------------------------

    @classmethod
    def start(
        cls,
        grid: GridMap,
        preference: PreferenceTuple,
        *,
        session_id: Optional[str] = None,
        config: Optional[SessionConfig] = None,
        clock: Optional[Callable[[], float]] = None,
    ) -> "Session":
        """Plan, explain, and land in the Explained state."""
        session = cls(grid, session_id=session_id, config=config, clock=clock)
        session._check_violations(preference)
        with session._lock:
            session._reserve(2)
            session._record(
                EventKind.PREFERENCE_SET, {"preference": preference_to_dict(preference)}
            )
            session._record(EventKind.EXPLAINED, {})
        return session

    # -- operations ----------------------------------------------------

    def ask_question(self, question: Question) -> Answer:
        with self._lock:
            if self.state is not SessionState.EXPLAINED:
                raise WrongStateError(
                    f"questions are accepted only when explained, not in {self.state.value}"
                )
            assert self.explanation is not None and self.preference is not None
            if (question.state, question.action) not in self.explanation.provenance:
                raise NotInExplanationError(
                    f"({question.state}, {question.action.value}) is not part of the explanation"
                )
            vocabulary = find_corpus(self.preference.corpus, self.grid)
            action = vocabulary.action_phrase(question.state, question.action)
            state = vocabulary.state_phrase(question.state)
            objective = self.preference.objective.phrase
            question_text = QUESTION_TEMPLATE.format(
                action=_question_verb(action), state=state
            )
            answer_text = ANSWER_TEMPLATE.format(action=action, state=state, objective=objective)
            self._reserve(1)
            self._record(
                EventKind.QUESTION_ASKED,
                {
                    "state": question.state,
                    "action": question.action.value,
                    "question": question_text,
                    "answer": answer_text,
                },
            )
            return Answer(text=answer_text, question=question_text)

    def submit_preference_update(self, updated: PreferenceTuple) -> UpdatePrompt:
        with self._lock:
            if self.state is not SessionState.EXPLAINED:
                raise WrongStateError(
                    f"preference updates are accepted only when explained, not in {self.state.value}"
                )
            self._check_violations(updated)
            if self._must_differ and updated == self.preference:
                raise PreferenceInvalidError(
                    [
                        Violation(
                            "PreferenceUnchanged",
                            "a new preference different from the current one is required",
                        )
                    ]
                )
            assert self.preference is not None
            conflict = classify_conflict(self.preference, updated)
            if conflict is not ConflictKind.NONE:
                # Surface explanation infeasibility (e.g. a position off the
                # new route) now, so confirm() can never fail mid-flight.
                policy = (
                    self.policy
                    if conflict is ConflictKind.SOFT
                    else self._plan(updated)
                )
                assert policy is not None
                try:
                    generate_explanation(self.mdp, policy, updated)
                except (EmptySelectionError, SegmentNotOnRouteError) as exc:
                    raise PreferenceInvalidError(
                        [Violation(exc.code, exc.message)]
                    ) from exc
            prompt = PROMPTS[conflict]
            self._reserve(1)
            self._record(
                EventKind.CONFLICT_DETECTED,
                {
                    "conflict": conflict.value,
                    "preference": preference_to_dict(updated),
                    "prompt": prompt,
                },
            )
            return UpdatePrompt(conflict=conflict, prompt=prompt)

    def confirm(self, yes: bool) -> "Session":
        with self._lock:
            if self.state not in _AWAITING:
                raise WrongStateError(
                    f"nothing to confirm in state {self.state.value}"
                )
            if self.state is SessionState.AWAITING_DONE_CONFIRM:
                if yes:
                    self._reserve(2)
                    self._record(EventKind.CONFIRM_YES, {})
                    self._record(EventKind.FINALIZED, {})
                else:
                    self._reserve(1)
                    self._record(EventKind.CONFIRM_NO, {})
            elif yes:
                assert self.pending_preference is not None
                adopted = preference_to_dict(self.pending_preference)
                self._reserve(3)
                self._record(EventKind.CONFIRM_YES, {})
                self._record(EventKind.PREFERENCE_SET, {"preference": adopted})
                self._record(EventKind.EXPLAINED, {})
            else:
                self._reserve(1)
                self._record(EventKind.CONFIRM_NO, {})
            return self

    @property
    def update_count(self) -> int:
        """Adopted preference updates (the initial preference is not one)."""
        sets = sum(1 for e in self.transcript if e.kind is EventKind.PREFERENCE_SET)
        return max(0, sets - 1)

    @property
    def conflict(self) -> Optional[ConflictKind]:
        if self.state is SessionState.AWAITING_SOFT_CONFIRM:
            return ConflictKind.SOFT
        if self.state is SessionState.AWAITING_HARD_CONFIRM:
            return ConflictKind.HARD
        if self.state is SessionState.AWAITING_DONE_CONFIRM:
            return ConflictKind.NONE
        return None

    @property
    def prompt(self) -> Optional[str]:
        conflict = self.conflict
        return PROMPTS[conflict] if conflict is not None else None

    def route(self) -> Optional[Route]:
        if self.policy is None:
            return None
        return extract_route(self.policy, self.mdp)

    def metrics(self) -> Optional[RouteMetrics]:
        route = self.route()
        if route is None:
            return None
        return route_metrics(route, self.mdp)

    def snapshot(self) -> dict:
        """JSON-ready view of the session (map data is added by the service)."""
        route = self.route()
        metrics = self.metrics()
        explanation = self.explanation
        return {
            "id": self.id,
            "state": self.state.value,
            "preference": preference_to_dict(self.preference) if self.preference else None,
            "pendingPreference": (
                preference_to_dict(self.pending_preference) if self.pending_preference else None
            ),
            "conflict": self.conflict.value if self.conflict else None,
            "prompt": self.prompt,
            "route": [[state, action.value] for state, action in route.steps] if route else None,
            "metrics": (
                {"moves": metrics.moves, "crowdedEntries": metrics.crowded_entries}
                if metrics
                else None
            ),
            "explanation": (
                {
                    "sentences": [
                        {"text": s.text, "state": s.state, "action": s.action.value}
                        for s in explanation.sentences
                    ],
                    "preference": preference_to_dict(explanation.preference),
                    "routeStates": list(explanation.route_states),
                }
                if explanation
                else None
            ),
            "updateCount": self.update_count,
        }

    def transcript_jsonl(self) -> str:
        return "".join(json.dumps(e.as_dict()) + "\n" for e in self.transcript)

    # -- event plumbing --------------------------------------------------

    def _check_violations(self, preference: PreferenceTuple) -> None:
        violations = validate_preference(preference, self.grid)
        if violations:
            raise PreferenceInvalidError(violations)

    def _reserve(self, count: int) -> None:
        if len(self.transcript) + count > self.config.event_limit:
            raise EventLimitExceededError(
                f"session event limit {self.config.event_limit} reached"
            )

    def _record(self, kind: EventKind, payload: dict) -> None:
        timestamp = self._clock()
        if self.transcript and timestamp < self.transcript[-1].timestamp:
            timestamp = self.transcript[-1].timestamp
        event = TranscriptEvent(
            seq=len(self.transcript), timestamp=timestamp, kind=kind, payload=payload
        )
        self.transcript.append(event)
        self._apply(event)

    def _plan(self, preference: PreferenceTuple) -> Policy:
        key = (
            self.grid,
            self.config.slip_probability,
            preference.objective,
            self.config.discount,
            self.config.tolerance,
            self.config.iteration_cap,
        )
        with _POLICY_CACHE_LOCK:
            policy = _POLICY_CACHE.get(key)
        if policy is None:
            policy = plan_policy(
                self.mdp,
                preference.objective,
                discount=self.config.discount,
                tolerance=self.config.tolerance,
                iteration_cap=self.config.iteration_cap,
            )
            with _POLICY_CACHE_LOCK:
                while len(_POLICY_CACHE) >= _POLICY_CACHE_CAP:
                    _POLICY_CACHE.pop(next(iter(_POLICY_CACHE)))
                _POLICY_CACHE[key] = policy
        return policy

    def _apply(self, event: TranscriptEvent) -> None:
        """The replay reducer; the only place session state mutates."""
        kind = event.kind
        if kind is EventKind.PREFERENCE_SET:
            preference = preference_from_dict(event.payload["preference"])
            self.preference = preference
            self.pending_preference = None
            if self.policy is None or self.policy.objective is not preference.objective:
                self.policy = self._plan(preference)
            self.state = SessionState.PLANNED
        elif kind is EventKind.EXPLAINED:
            assert self.policy is not None and self.preference is not None
            self.explanation = generate_explanation(self.mdp, self.policy, self.preference)
            self.state = SessionState.EXPLAINED
        elif kind is EventKind.QUESTION_ASKED:
            pass
        elif kind is EventKind.CONFLICT_DETECTED:
            conflict = ConflictKind(event.payload["conflict"])
            self._must_differ = False
            if conflict is ConflictKind.NONE:
                self.state = SessionState.AWAITING_DONE_CONFIRM
            else:
                self.pending_preference = preference_from_dict(event.payload["preference"])
                self.state = (
                    SessionState.AWAITING_SOFT_CONFIRM
                    if conflict is ConflictKind.SOFT
                    else SessionState.AWAITING_HARD_CONFIRM
                )
        elif kind is EventKind.CONFIRM_YES:
            pass
        elif kind is EventKind.CONFIRM_NO:
            if self.state is SessionState.AWAITING_DONE_CONFIRM:
                self._must_differ = True
            self.pending_preference = None
            self.state = SessionState.EXPLAINED
        elif kind is EventKind.FINALIZED:
            self.state = SessionState.FINALIZED


def start_session(
    grid: GridMap,
    preference: PreferenceTuple,
    *,
    session_id: Optional[str] = None,
    config: Optional[SessionConfig] = None,
) -> Session:
    return Session.start(grid, preference, session_id=session_id, config=config)


def replay_session(
    grid: GridMap,
    events: list[TranscriptEvent],
    *,
    session_id: Optional[str] = None,
    config: Optional[SessionConfig] = None,
) -> Session:
    """Rebuild a session from its transcript (event-sourcing replay)."""
    session = Session(grid, session_id=session_id, config=config)
    for event in events:
        session.transcript.append(event)
        session._apply(event)
    return session


def parse_transcript(jsonl: str) -> list[TranscriptEvent]:
    return [
        TranscriptEvent.from_dict(json.loads(line))
        for line in jsonl.splitlines()
        if line.strip()
    ]
