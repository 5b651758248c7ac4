"""The four-element user preference tuple and conflict classification.

Wire format (version "v1") is a flat JSON object of four strings, e.g.::

    {"version": "v1", "objective": "shortest", "locality": "segment:landmark:destination",
     "specificity": "every", "corpus": "concrete"}

Locality strings: ``global``, ``only:<corridor|crowded>``,
``segment:<kind>:<kind>``, ``position:<cell index>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

from .map_model import CellKind, GridMap
from .planner import Objective

WIRE_VERSION = "v1"


@dataclass(frozen=True)
class Global:
    """Explain the entire route."""


@dataclass(frozen=True)
class OnlyKind:
    """Explain only cells of one passage kind (corridor or crowded)."""

    kind: CellKind

    def __post_init__(self) -> None:
        if self.kind not in (CellKind.CORRIDOR, CellKind.CROWDED):
            raise ValueError(f"locality kind must be corridor or crowded, got {self.kind.value}")


@dataclass(frozen=True)
class Segment:
    """Explain the contiguous sub-route between two cell kinds."""

    from_kind: CellKind
    to_kind: CellKind


@dataclass(frozen=True)
class AtPosition:
    """Explain a single cell, if the route passes it."""

    state: int


Locality = Union[Global, OnlyKind, Segment, AtPosition]


class Specificity(Enum):
    EVERY_STATE = "every"
    CRITICAL_ONLY = "critical"


class Corpus(Enum):
    CONCRETE = "concrete"
    HIGH_LEVEL = "high_level"


class ConflictKind(Enum):
    NONE = "none"
    SOFT = "soft"
    HARD = "hard"


@dataclass(frozen=True)
class PreferenceTuple:
    objective: Objective
    locality: Locality
    specificity: Specificity
    corpus: Corpus


#: Study-questionnaire wording for the drop-down options.
DISPLAY_LABELS = {
    "objective:shortest": "Shortest Path",
    "objective:safest": "Safest Path",
    "objective:combined": "Shortest and Safest Path",
    "locality:global": "Global",
    "locality:only:corridor": "Only Highways",
    "locality:only:crowded": "Only Alleyways",
    "locality:position": "Single Position",
    "locality:segment": "Segment",
    "specificity:every": "All Information",
    "specificity:critical": "Important Information",
    "corpus:concrete": "Lefts and Rights",
    "corpus:high_level": "Landmarks",
}


def classify_conflict(previous: PreferenceTuple, updated: PreferenceTuple) -> ConflictKind:
    """Hard iff the objective changed; soft iff only other fields changed."""
    if previous.objective is not updated.objective:
        return ConflictKind.HARD
    if previous != updated:
        return ConflictKind.SOFT
    return ConflictKind.NONE


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def as_dict(self) -> dict[str, str]:
        return {"code": self.code, "message": self.message}


def validate_preference(preference: PreferenceTuple, grid: GridMap) -> list[Violation]:
    """Map-dependent checks; an empty list means the preference is usable."""
    violations: list[Violation] = []
    locality = preference.locality
    if isinstance(locality, AtPosition):
        if not 0 <= locality.state < len(grid.cells):
            violations.append(
                Violation("PositionOffGrid", f"cell {locality.state} is outside the map")
            )
        elif grid.kind(locality.state) is CellKind.OBSTACLE:
            violations.append(
                Violation("PositionIsObstacle", f"cell {locality.state} is an obstacle")
            )
    elif isinstance(locality, Segment):
        for kind in (locality.from_kind, locality.to_kind):
            if not grid.states_of_kind(kind):
                violations.append(
                    Violation("SegmentKindAbsent", f"map has no {kind.value} cell")
                )
    return violations


def locality_to_string(locality: Locality) -> str:
    if isinstance(locality, Global):
        return "global"
    if isinstance(locality, OnlyKind):
        return f"only:{locality.kind.value}"
    if isinstance(locality, Segment):
        return f"segment:{locality.from_kind.value}:{locality.to_kind.value}"
    return f"position:{locality.state}"


def locality_from_string(text: str) -> Locality:
    if text == "global":
        return Global()
    head, _, rest = text.partition(":")
    if head == "only" and rest:
        return OnlyKind(_cell_kind(rest))
    if head == "segment" and rest:
        from_text, _, to_text = rest.partition(":")
        if not to_text:
            raise ValueError(f"segment locality needs two kinds, got {text!r}")
        return Segment(_cell_kind(from_text), _cell_kind(to_text))
    if head == "position" and rest:
        try:
            return AtPosition(int(rest))
        except ValueError:
            raise ValueError(f"position locality needs an integer cell, got {text!r}") from None
    raise ValueError(f"unknown locality {text!r}")


def _cell_kind(text: str) -> CellKind:
    try:
        return CellKind(text)
    except ValueError:
        raise ValueError(f"unknown cell kind {text!r}") from None


def preference_to_dict(preference: PreferenceTuple) -> dict[str, str]:
    return {
        "version": WIRE_VERSION,
        "objective": preference.objective.value,
        "locality": locality_to_string(preference.locality),
        "specificity": preference.specificity.value,
        "corpus": preference.corpus.value,
    }


def preference_from_dict(data: dict) -> PreferenceTuple:
    """Parse the wire form; raises ValueError on malformed input."""
    if not isinstance(data, dict):
        raise ValueError("preference must be a JSON object")
    version = data.get("version", WIRE_VERSION)
    if version != WIRE_VERSION:
        raise ValueError(f"unsupported preference version {version!r}")
    missing = [key for key in ("objective", "locality", "specificity", "corpus") if key not in data]
    if missing:
        raise ValueError(f"preference missing fields: {', '.join(missing)}")
    try:
        objective = Objective(data["objective"])
    except ValueError:
        raise ValueError(f"unknown objective {data['objective']!r}") from None
    locality = locality_from_string(str(data["locality"]))
    try:
        specificity = Specificity(data["specificity"])
    except ValueError:
        raise ValueError(f"unknown specificity {data['specificity']!r}") from None
    try:
        corpus = Corpus(data["corpus"])
    except ValueError:
        raise ValueError(f"unknown corpus {data['corpus']!r}") from None
    return PreferenceTuple(
        objective=objective, locality=locality, specificity=specificity, corpus=corpus
    )
