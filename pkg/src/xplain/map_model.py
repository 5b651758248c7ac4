"""Grid maps, their text file format, and MDP derivation.

A map is a rectangular character grid: ``S`` start, ``D`` destination,
``#`` obstacle, ``*`` landmark, ``r`` crowded passage, ``.`` corridor.
Row 0 is the top row; cell index of (row r, col c) is ``r*width + c``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional

from .errors import (
    DuplicateDestinationError,
    DuplicateStartError,
    EmptyMapError,
    InvalidProbabilityError,
    MissingDestinationError,
    MissingStartError,
    RaggedRowsError,
    UnknownCellError,
    UnreachableDestinationError,
)


class CellKind(Enum):
    START = "start"
    DESTINATION = "destination"
    OBSTACLE = "obstacle"
    LANDMARK = "landmark"
    CROWDED = "crowded"
    CORRIDOR = "corridor"

    @property
    def char(self) -> str:
        return _KIND_TO_CHAR[self]


_CHAR_TO_KIND = {
    "S": CellKind.START,
    "D": CellKind.DESTINATION,
    "#": CellKind.OBSTACLE,
    "*": CellKind.LANDMARK,
    "r": CellKind.CROWDED,
    ".": CellKind.CORRIDOR,
}
_KIND_TO_CHAR = {kind: char for char, kind in _CHAR_TO_KIND.items()}

#: Critical states: where compact explanations still speak.
CRITICAL_KINDS = frozenset({CellKind.START, CellKind.LANDMARK, CellKind.DESTINATION})


class MoveAction(Enum):
    NORTH = "north"
    EAST = "east"
    SOUTH = "south"
    WEST = "west"
    STOP = "stop"

    @property
    def delta(self) -> tuple[int, int]:
        return _DELTAS[self]


_DELTAS = {
    MoveAction.NORTH: (-1, 0),
    MoveAction.EAST: (0, 1),
    MoveAction.SOUTH: (1, 0),
    MoveAction.WEST: (0, -1),
    MoveAction.STOP: (0, 0),
}

#: Fixed order used for deterministic Q-value tie-breaking.
ACTION_ORDER = (
    MoveAction.NORTH,
    MoveAction.EAST,
    MoveAction.SOUTH,
    MoveAction.WEST,
    MoveAction.STOP,
)

# Slip pushes the robot sideways, never backwards.
_PERPENDICULAR = {
    MoveAction.NORTH: (MoveAction.EAST, MoveAction.WEST),
    MoveAction.SOUTH: (MoveAction.EAST, MoveAction.WEST),
    MoveAction.EAST: (MoveAction.NORTH, MoveAction.SOUTH),
    MoveAction.WEST: (MoveAction.NORTH, MoveAction.SOUTH),
}


@dataclass(frozen=True)
class GridMap:
    """Immutable rectangular cell grid; safe to share between threads."""

    width: int
    height: int
    cells: tuple[CellKind, ...]
    name: str = "map"

    def kind(self, state: int) -> CellKind:
        return self.cells[state]

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width

    def index(self, row: int, col: int) -> int:
        return row * self.width + col

    def coords(self, state: int) -> tuple[int, int]:
        return divmod(state, self.width)

    @property
    def start(self) -> int:
        return self.cells.index(CellKind.START)

    @property
    def destination(self) -> int:
        return self.cells.index(CellKind.DESTINATION)

    def states_of_kind(self, kind: CellKind) -> tuple[int, ...]:
        return tuple(i for i, k in enumerate(self.cells) if k is kind)

    def is_passable(self, state: int) -> bool:
        return self.cells[state] is not CellKind.OBSTACLE

    def step(self, state: int, action: MoveAction) -> Optional[int]:
        """Intended successor of ``action`` from ``state``.

        None when the target is off-grid or an obstacle (the action is not
        offered there; bumping is not modeled as stay-put).
        """
        if action is MoveAction.STOP:
            return state
        row, col = self.coords(state)
        drow, dcol = action.delta
        nrow, ncol = row + drow, col + dcol
        if not self.in_bounds(nrow, ncol):
            return None
        target = self.index(nrow, ncol)
        return target if self.is_passable(target) else None

    def passable_neighbors(self, state: int) -> Iterator[int]:
        for action in ACTION_ORDER[:4]:
            target = self.step(state, action)
            if target is not None:
                yield target


def parse_map(text: str, name: str = "map") -> GridMap:
    """Parse map-file text into a validated :class:`GridMap`.

    Accepts LF or CRLF line endings. Rejects ragged rows, unknown
    characters, missing/duplicate start or destination, and maps whose
    destination cannot be reached from the start through passable cells.
    """
    lines = [line.rstrip("\r") for line in text.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise EmptyMapError("map text is empty")

    width = len(lines[0])
    if width == 0:
        raise EmptyMapError("map rows are empty")
    for row, line in enumerate(lines):
        if len(line) != width:
            raise RaggedRowsError(
                f"row {row} has length {len(line)}, expected {width}", row=row
            )

    cells: list[CellKind] = []
    for row, line in enumerate(lines):
        for col, char in enumerate(line):
            kind = _CHAR_TO_KIND.get(char)
            if kind is None:
                raise UnknownCellError(
                    f"unknown cell character {char!r} at row {row}, col {col}",
                    char=char,
                    row=row,
                    col=col,
                )
            cells.append(kind)

    grid = GridMap(width=width, height=len(lines), cells=tuple(cells), name=name)
    _validate(grid)
    return grid


def serialize_map(grid: GridMap) -> str:
    """Inverse of :func:`parse_map` (round-trips up to trailing whitespace)."""
    rows = []
    for row in range(grid.height):
        rows.append(
            "".join(grid.cells[grid.index(row, col)].char for col in range(grid.width))
        )
    return "\n".join(rows) + "\n"


def _validate(grid: GridMap) -> None:
    starts = grid.states_of_kind(CellKind.START)
    destinations = grid.states_of_kind(CellKind.DESTINATION)
    if not starts:
        raise MissingStartError("map has no start cell")
    if len(starts) > 1:
        raise DuplicateStartError(f"map has {len(starts)} start cells", cells=starts)
    if not destinations:
        raise MissingDestinationError("map has no destination cell")
    if len(destinations) > 1:
        raise DuplicateDestinationError(
            f"map has {len(destinations)} destination cells", cells=destinations
        )

    # Reachability check over the deterministic 4-neighbor graph.
    seen = {starts[0]}
    frontier = deque(seen)
    while frontier:
        state = frontier.popleft()
        if state == destinations[0]:
            return
        for neighbor in grid.passable_neighbors(state):
            if neighbor not in seen:
                seen.add(neighbor)
                frontier.append(neighbor)
    raise UnreachableDestinationError(
        "no passable path from start to destination"
    )


@dataclass(frozen=True)
class Mdp:
    """MDP derived from a grid map; immutable after construction.

    Movement succeeds with probability ``1 - slip_probability``; the
    remainder is split uniformly over staying put and the valid
    perpendicular moves. Stop is offered only at the destination, where it
    self-loops with probability 1.
    """

    grid: GridMap
    slip_probability: float
    initial_state: int
    states: tuple[int, ...]
    actions: dict[int, tuple[MoveAction, ...]] = field(repr=False)
    _successors: dict[tuple[int, MoveAction], tuple[tuple[int, float], ...]] = field(
        repr=False
    )

    def valid_actions(self, state: int) -> tuple[MoveAction, ...]:
        return self.actions[state]

    def successors(self, state: int, action: MoveAction) -> tuple[tuple[int, float], ...]:
        return self._successors[(state, action)]

    def transition(self, state: int, action: MoveAction, successor: int) -> float:
        """The probabilistic transition function over (s, a, s')."""
        for target, probability in self._successors.get((state, action), ()):
            if target == successor:
                return probability
        return 0.0

    def intended_successor(self, state: int, action: MoveAction) -> int:
        """Maximum-probability successor (the nominal outcome)."""
        target = self.grid.step(state, action)
        assert target is not None
        return target

    def distance_reward(self, state: int, action: MoveAction, successor: int) -> float:
        """R1: -1 per navigated grid."""
        return -1.0 if successor != state else 0.0

    def safety_reward(self, state: int, action: MoveAction, successor: int) -> float:
        """R2: -1 per navigated crowded grid."""
        if successor != state and self.grid.kind(successor) is CellKind.CROWDED:
            return -1.0
        return 0.0


def build_mdp(grid: GridMap, slip_probability: float = 0.2) -> Mdp:
    """Derive the navigation MDP for ``grid``.

    ``slip_probability`` must lie in [0, 1); the default 0.2 gives the
    standard 0.8-intended motion model.
    """
    if not 0.0 <= slip_probability < 1.0:
        raise InvalidProbabilityError(
            f"slip probability {slip_probability} outside [0, 1)"
        )

    destination = grid.destination
    states = tuple(s for s in range(len(grid.cells)) if grid.is_passable(s))
    actions: dict[int, tuple[MoveAction, ...]] = {}
    successors: dict[tuple[int, MoveAction], tuple[tuple[int, float], ...]] = {}

    for state in states:
        if state == destination:
            actions[state] = (MoveAction.STOP,)
            successors[(state, MoveAction.STOP)] = ((state, 1.0),)
            continue
        offered = []
        for action in ACTION_ORDER[:4]:
            intended = grid.step(state, action)
            if intended is None:
                continue
            offered.append(action)
            if slip_probability == 0.0:
                successors[(state, action)] = ((intended, 1.0),)
                continue
            slip_targets = [state]
            for perpendicular in _PERPENDICULAR[action]:
                target = grid.step(state, perpendicular)
                if target is not None:
                    slip_targets.append(target)
            share = slip_probability / len(slip_targets)
            successors[(state, action)] = (
                (intended, 1.0 - slip_probability),
                *((target, share) for target in slip_targets),
            )
        actions[state] = tuple(offered)

    return Mdp(
        grid=grid,
        slip_probability=slip_probability,
        initial_state=grid.start,
        states=states,
        actions=actions,
        _successors=successors,
    )
