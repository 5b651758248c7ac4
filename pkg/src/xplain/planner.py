"""Optimal-policy computation via value iteration and nominal-route extraction."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

from .errors import NoValidActionError, RouteCycleError
from .map_model import ACTION_ORDER, CellKind, Mdp, MoveAction

#: Q-values within this epsilon of the maximum tie; first action in
#: ACTION_ORDER wins, making planning reproducible across runs.
Q_TIE_EPSILON = 1e-9

DEFAULT_DISCOUNT = 0.99
DEFAULT_TOLERANCE = 1e-6
DEFAULT_ITERATION_CAP = 10_000


class Objective(Enum):
    SHORTEST = "shortest"
    SAFEST = "safest"
    COMBINED = "combined"

    @property
    def phrase(self) -> str:
        return _OBJECTIVE_PHRASES[self]


_OBJECTIVE_PHRASES = {
    Objective.SHORTEST: "the shortest route",
    Objective.SAFEST: "the safest route",
    Objective.COMBINED: "the shortest and safest route",
}


@dataclass(frozen=True)
class Policy:
    """Greedy policy with its converged state values."""

    action_of: dict[int, MoveAction]
    objective: Objective
    values: dict[int, float]
    discount: float
    iterations: int


@dataclass(frozen=True)
class Route:
    """Nominal route: intended-successor projection of a policy."""

    steps: tuple[tuple[int, MoveAction], ...]

    @property
    def states(self) -> tuple[int, ...]:
        return tuple(state for state, _ in self.steps)


@dataclass(frozen=True)
class RouteMetrics:
    moves: int
    crowded_entries: int


def _reward_fn(mdp: Mdp, objective: Objective):
    # Safest is lexicographic (safety, then distance): scale R2 past any
    # achievable distance total on this map.
    if objective is Objective.SHORTEST:
        return mdp.distance_reward
    if objective is Objective.SAFEST:
        scale = float(mdp.grid.width * mdp.grid.height + 1)

        def lexicographic(state: int, action: MoveAction, successor: int) -> float:
            return scale * mdp.safety_reward(state, action, successor) + mdp.distance_reward(
                state, action, successor
            )

        return lexicographic

    def combined(state: int, action: MoveAction, successor: int) -> float:
        return mdp.distance_reward(state, action, successor) + mdp.safety_reward(
            state, action, successor
        )

    return combined


def _reachable_states(mdp: Mdp) -> set[int]:
    seen = {mdp.initial_state}
    frontier = deque(seen)
    while frontier:
        state = frontier.popleft()
        for action in mdp.valid_actions(state):
            for successor, _ in mdp.successors(state, action):
                if successor not in seen:
                    seen.add(successor)
                    frontier.append(successor)
    return seen


def plan_policy(
    mdp: Mdp,
    objective: Objective,
    discount: float = DEFAULT_DISCOUNT,
    tolerance: float = DEFAULT_TOLERANCE,
    iteration_cap: int = DEFAULT_ITERATION_CAP,
) -> Policy:
    """Value-iterate to convergence and extract the greedy policy.

    Deterministic: ties among near-equal Q-values resolve in the fixed
    order north, east, south, west, stop.
    """
    if not 0.0 < discount < 1.0:
        raise ValueError(f"discount {discount} outside (0, 1)")
    if tolerance <= 0.0:
        raise ValueError(f"tolerance {tolerance} must be positive")

    for state in _reachable_states(mdp):
        if not mdp.valid_actions(state):
            raise NoValidActionError(
                f"reachable state {state} has no valid actions", state=state
            )

    reward = _reward_fn(mdp, objective)
    # Passable cells with no actions are unreachable islands; leave them out.
    states = [s for s in mdp.states if mdp.valid_actions(s)]
    values = {s: 0.0 for s in states}

    def q_value(state: int, action: MoveAction) -> float:
        return sum(
            probability * (reward(state, action, successor) + discount * values[successor])
            for successor, probability in mdp.successors(state, action)
        )

    iterations = 0
    for iterations in range(1, iteration_cap + 1):
        delta = 0.0
        updated = {}
        for state in states:
            best = max(q_value(state, action) for action in mdp.valid_actions(state))
            updated[state] = best
            change = abs(best - values[state])
            if change > delta:
                delta = change
        values = updated
        if delta < tolerance:
            break

    action_of: dict[int, MoveAction] = {}
    for state in states:
        q_values = {action: q_value(state, action) for action in mdp.valid_actions(state)}
        best = max(q_values.values())
        action_of[state] = next(
            action
            for action in ACTION_ORDER
            if action in q_values and q_values[action] >= best - Q_TIE_EPSILON
        )

    return Policy(
        action_of=action_of,
        objective=objective,
        values=values,
        discount=discount,
        iterations=iterations,
    )


def extract_route(policy: Policy, mdp: Mdp) -> Route:
    """Follow intended successors from the initial state until Stop.

    Raises RouteCycleError instead of looping if the nominal projection
    revisits a state.
    """
    steps: list[tuple[int, MoveAction]] = []
    visited: set[int] = set()
    state = mdp.initial_state
    while True:
        if state in visited:
            raise RouteCycleError(
                f"nominal route revisits state {state}", state=state
            )
        visited.add(state)
        action = policy.action_of.get(state)
        if action is None:
            raise NoValidActionError(
                f"policy undefined at reachable state {state}", state=state
            )
        steps.append((state, action))
        if action is MoveAction.STOP:
            return Route(steps=tuple(steps))
        state = mdp.intended_successor(state, action)


def route_metrics(route: Route, mdp: Mdp) -> RouteMetrics:
    """Moves taken and crowded cells entered along the nominal route."""
    moves = sum(1 for _, action in route.steps if action is not MoveAction.STOP)
    crowded_entries = sum(
        1
        for state, _ in route.steps[1:]
        if mdp.grid.kind(state) is CellKind.CROWDED
    )
    return RouteMetrics(moves=moves, crowded_entries=crowded_entries)
