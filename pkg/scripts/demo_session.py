#!/usr/bin/env python3
"""End-to-end demo on the bundled 5x5 map.

Walks the whole loop in one go: plan + explain for an initial preference,
ask a contrastive question, run a soft update (new wording, same plan), a
hard update (new objective, new plan), then finalize. Prints everything.
"""

from __future__ import annotations

from xplain import (
    CellKind,
    Corpus,
    Global,
    MoveAction,
    Objective,
    PreferenceTuple,
    Question,
    Segment,
    Session,
    Specificity,
    paper_map,
)
from xplain.cli import render_map


def show(session: Session, heading: str) -> None:
    print(f"\n== {heading} ==")
    route = session.route()
    metrics = session.metrics()
    print(render_map(session.grid, route.steps if route else None))
    if metrics:
        print(f"{metrics.moves} moves, {metrics.crowded_entries} crowded entries")
    for number, sentence in enumerate(session.explanation.sentences, start=1):
        print(f"  {number}. {sentence.text}")


def main() -> None:
    grid = paper_map()
    session = Session.start(
        grid,
        PreferenceTuple(
            Objective.SHORTEST,
            Segment(CellKind.LANDMARK, CellKind.DESTINATION),
            Specificity.EVERY_STATE,
            Corpus.CONCRETE,
        ),
    )
    show(session, "shortest route, landmark-to-destination segment, concrete")

    answer = session.ask_question(Question(state=12, action=MoveAction.EAST))
    print(f"\nQ: {answer.question}")
    print(f"A: {answer.text}")

    soft = session.submit_preference_update(
        PreferenceTuple(
            Objective.SHORTEST, Global(), Specificity.CRITICAL_ONLY, Corpus.HIGH_LEVEL
        )
    )
    print(f"\n[{soft.conflict.value} conflict] {soft.prompt} -> yes")
    session.confirm(True)
    show(session, "same plan, high-level summary")

    hard = session.submit_preference_update(
        PreferenceTuple(
            Objective.SAFEST, Global(), Specificity.CRITICAL_ONLY, Corpus.HIGH_LEVEL
        )
    )
    print(f"\n[{hard.conflict.value} conflict] {hard.prompt} -> yes")
    session.confirm(True)
    show(session, "safest route after the hard update")

    session.submit_preference_update(session.preference)
    session.confirm(True)
    print(f"\nFinalized after {session.update_count} preference updates.")
    print(f"Transcript: {len(session.transcript)} events")


if __name__ == "__main__":
    main()
