"""Terminal front door: validate maps, plan and explain in batch, host the
service, and drive a full interactive session.

Exit codes: 0 success, 1 domain error (diagnostic on stderr), 2 I/O error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from .dialogue import Question, Session, SessionState
from .errors import XplainError
from .explainer import Explanation
from .map_model import GridMap, MoveAction, build_mdp, parse_map
from .planner import (
    DEFAULT_DISCOUNT,
    DEFAULT_TOLERANCE,
    Objective,
    extract_route,
    plan_policy,
    route_metrics,
)
from .preference import (
    Corpus,
    PreferenceTuple,
    Specificity,
    locality_from_string,
    preference_from_dict,
    preference_to_dict,
)

_ARROWS = {
    MoveAction.NORTH: "^",
    MoveAction.EAST: ">",
    MoveAction.SOUTH: "v",
    MoveAction.WEST: "<",
}


def _read_map_file(path: str) -> GridMap:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        sys.exit(2)
    return parse_map(text, name=Path(path).stem)


def _fail(exc: XplainError) -> None:
    click.echo(f"{exc.code}: {exc.message}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Plan grid-world robot routes and explain them in plain language."""


@main.command("validate-map")
@click.argument("map_file")
def validate_map(map_file: str) -> None:
    """Exit 0 if MAP_FILE is a valid map, 1 with a diagnostic otherwise."""
    try:
        grid = _read_map_file(map_file)
    except XplainError as exc:
        _fail(exc)
        return
    click.echo(f"ok: {grid.width}x{grid.height} map, {len(grid.cells)} cells")


@main.command("plan")
@click.argument("map_file")
@click.option("--objective", type=click.Choice([o.value for o in Objective]), default="shortest")
@click.option("--discount", type=float, default=DEFAULT_DISCOUNT, show_default=True)
@click.option("--tolerance", type=float, default=DEFAULT_TOLERANCE, show_default=True)
@click.option("--slip", type=float, default=0.2, show_default=True)
def plan(map_file: str, objective: str, discount: float, tolerance: float, slip: float) -> None:
    """Plan a route on MAP_FILE and print it with its metrics as JSON."""
    try:
        grid = _read_map_file(map_file)
        mdp = build_mdp(grid, slip)
        policy = plan_policy(mdp, Objective(objective), discount=discount, tolerance=tolerance)
        route = extract_route(policy, mdp)
        metrics = route_metrics(route, mdp)
    except XplainError as exc:
        _fail(exc)
        return
    click.echo(
        json.dumps(
            {
                "objective": objective,
                "route": [[state, action.value] for state, action in route.steps],
                "metrics": {"moves": metrics.moves, "crowdedEntries": metrics.crowded_entries},
            }
        )
    )


@main.command("explain")
@click.argument("map_file")
@click.option("--objective", type=click.Choice([o.value for o in Objective]), default="shortest")
@click.option("--locality", default="global", show_default=True)
@click.option("--specificity", type=click.Choice([s.value for s in Specificity]), default="every")
@click.option("--corpus", type=click.Choice([c.value for c in Corpus]), default="concrete")
@click.option("--pref", default=None, help="Full preference as JSON; overrides the flags.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.option("--slip", type=float, default=0.2, show_default=True)
def explain(
    map_file: str,
    objective: str,
    locality: str,
    specificity: str,
    corpus: str,
    pref: Optional[str],
    fmt: str,
    slip: float,
) -> None:
    """Print the explanation sentences for MAP_FILE under a preference."""
    try:
        grid = _read_map_file(map_file)
        if pref is not None:
            preference = preference_from_dict(json.loads(pref))
        else:
            preference = PreferenceTuple(
                objective=Objective(objective),
                locality=locality_from_string(locality),
                specificity=Specificity(specificity),
                corpus=Corpus(corpus),
            )
        session = Session.start(grid, preference)
    except XplainError as exc:
        _fail(exc)
        return
    except (ValueError, json.JSONDecodeError) as exc:
        click.echo(f"PreferenceMalformed: {exc}", err=True)
        sys.exit(1)
    explanation = session.explanation
    assert explanation is not None
    if fmt == "json":
        click.echo(json.dumps(_explanation_dict(explanation)))
    else:
        for sentence in explanation.sentences:
            click.echo(sentence.text)


def _explanation_dict(explanation: Explanation) -> dict:
    return {
        "sentences": [
            {"text": s.text, "state": s.state, "action": s.action.value}
            for s in explanation.sentences
        ],
        "preference": preference_to_dict(explanation.preference),
        "routeStates": list(explanation.route_states),
    }


@main.command("serve")
@click.option("--addr", default=None, help="host:port (default XPLAIN_ADDR or 127.0.0.1:8080)")
@click.option("--data-dir", default=None, help="store directory (default XPLAIN_DATA_DIR or ./data)")
def serve(addr: Optional[str], data_dir: Optional[str]) -> None:
    """Run the HTTP/JSON service."""
    from .service import serve as run_service

    run_service(addr=addr, data_dir=data_dir)


def render_map(grid: GridMap, route_steps=None) -> str:
    """ASCII map; the route, when given, is overlaid as direction arrows."""
    chars = [kind.char for kind in grid.cells]
    for state, action in route_steps or ():
        if action is MoveAction.STOP:
            continue
        chars[state] = _ARROWS[action]
    rows = []
    for row in range(grid.height):
        rows.append("".join(chars[grid.index(row, col)] for col in range(grid.width)))
    return "\n".join(rows)


class _Prompter:
    """Reads replies from a script file when given, else from stdin."""

    def __init__(self, script: Optional[str]) -> None:
        self._lines: Optional[list[str]] = None
        if script is not None:
            self._lines = Path(script).read_text(encoding="utf-8").splitlines()
            self._lines.reverse()

    def ask(self, prompt: str) -> str:
        if self._lines is None:
            return input(prompt)
        if not self._lines:
            raise EOFError
        reply = self._lines.pop()
        click.echo(f"{prompt}{reply}")
        return reply

    def choose(self, title: str, options: list[tuple[str, str]]) -> str:
        click.echo(title)
        for number, (_, label) in enumerate(options, start=1):
            click.echo(f"  {number}. {label}")
        while True:
            reply = self.ask("> ").strip()
            if reply.isdigit() and 1 <= int(reply) <= len(options):
                return options[int(reply) - 1][0]
            click.echo("Please answer with one of the numbers above.")

    def yes_no(self, prompt: str) -> bool:
        while True:
            reply = self.ask(f"{prompt} [yes/no] ").strip().lower()
            if reply in ("yes", "y"):
                return True
            if reply in ("no", "n"):
                return False
            click.echo("Please answer yes or no.")


def _elicit_preference(prompter: _Prompter, grid: GridMap) -> PreferenceTuple:
    objective = prompter.choose(
        "Objective:",
        [
            ("shortest", "Shortest Path"),
            ("safest", "Safest Path"),
            ("combined", "Shortest and Safest Path"),
        ],
    )
    locality = prompter.choose(
        "Locality:",
        [
            ("global", "Global (entire route)"),
            ("only:corridor", "Only Highways (corridor cells)"),
            ("only:crowded", "Only Alleyways (crowded cells)"),
            ("segment:landmark:destination", "Segment (landmark to destination)"),
            ("position", "Single Position"),
        ],
    )
    if locality == "position":
        cell = prompter.ask("Cell index: ").strip()
        locality = f"position:{cell}"
    specificity = prompter.choose(
        "Specificity:",
        [("every", "All Information (every state)"), ("critical", "Important Information (critical states)")],
    )
    corpus = prompter.choose(
        "Corpus:",
        [("concrete", "Lefts and Rights (grid indices)"), ("high_level", "Landmarks (high-level)")],
    )
    return PreferenceTuple(
        objective=Objective(objective),
        locality=locality_from_string(locality),
        specificity=Specificity(specificity),
        corpus=Corpus(corpus),
    )


def _show_explanation(session: Session) -> None:
    explanation = session.explanation
    assert explanation is not None
    route = session.route()
    metrics = session.metrics()
    assert route is not None and metrics is not None
    click.echo(render_map(session.grid, route.steps))
    click.echo(
        f"Route: {' -> '.join(str(s) for s in route.states)} "
        f"({metrics.moves} moves, {metrics.crowded_entries} crowded)"
    )
    click.echo("Explanation:")
    for number, sentence in enumerate(explanation.sentences, start=1):
        click.echo(f"  {number}. {sentence.text}")


@main.command("session")
@click.argument("map_file")
@click.option("--script", default=None, help="Read replies from this file instead of stdin.")
@click.option("--transcript-out", default=None, help="Write the transcript JSONL here on exit.")
@click.option("--slip", type=float, default=0.2, show_default=True)
def session_cmd(map_file: str, script: Optional[str], transcript_out: Optional[str], slip: float) -> None:
    """Drive a full interactive session on MAP_FILE in the terminal."""
    try:
        grid = _read_map_file(map_file)
    except XplainError as exc:
        _fail(exc)
        return
    prompter = _Prompter(script)
    session: Optional[Session] = None
    try:
        click.echo(render_map(grid))
        click.echo("Choose your preferences.")
        while session is None:
            try:
                session = Session.start(grid, _elicit_preference(prompter, grid))
            except XplainError as exc:
                click.echo(f"{exc.code}: {exc.message}; please choose again.")
            except ValueError as exc:
                click.echo(f"PreferenceMalformed: {exc}; please choose again.")
        _show_explanation(session)
        while session.state is not SessionState.FINALIZED:
            action = prompter.choose(
                "What next?",
                [
                    ("question", "Ask why the robot acts as it does in a state"),
                    ("update", "Update preferences"),
                    ("finish", "Finish and execute the route"),
                ],
            )
            try:
                if action == "question":
                    reply = prompter.ask("Which cell? ").strip()
                    if not reply.lstrip("-").isdigit():
                        click.echo("Please give a cell index.")
                        continue
                    cell = int(reply)
                    explanation = session.explanation
                    assert explanation is not None
                    move = next(
                        (a for s, a in explanation.provenance if s == cell), None
                    )
                    if move is None:
                        click.echo("That cell is not part of the explanation.")
                        continue
                    answer = session.ask_question(Question(state=cell, action=move))
                    click.echo(answer.question)
                    click.echo(answer.text)
                elif action == "update":
                    updated = _elicit_preference(prompter, grid)
                    prompt = session.submit_preference_update(updated)
                    if session.confirm(prompter.yes_no(prompt.prompt)).state is SessionState.EXPLAINED:
                        _show_explanation(session)
                else:
                    assert session.preference is not None
                    session.submit_preference_update(session.preference)
                    session.confirm(prompter.yes_no(session.prompt or "Finished?"))
            except XplainError as exc:
                click.echo(f"{exc.code}: {exc.message}")
            except ValueError as exc:
                click.echo(f"PreferenceMalformed: {exc}")
        click.echo(f"Route finalized. Preference updates: {session.update_count}.")
    except EOFError:
        click.echo("\nSession aborted.")
    finally:
        if transcript_out and session is not None:
            Path(transcript_out).write_text(session.transcript_jsonl(), encoding="utf-8")


if __name__ == "__main__":
    main()
