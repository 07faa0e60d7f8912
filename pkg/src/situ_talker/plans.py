"""Plan libraries (event networks) and intention recognition.

A library is a set of event schemas joined by is-a / part-of links.
Recognition is trigger unification plus link climbing: every event whose
trigger unifies with the observed frame starts one explanation per
upward path to a root, the matched event's goal pattern is instantiated
with the unified bindings (first-person instances rewritten to
``*speaker``), and explanations are scored by specificity — longer
paths and more consumed bindings score higher — then normalized with a
softmax so returned preferences lie in [0, 1] and sum to 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .errors import ConfigurationError, PlanLibraryError
from .frames import (
    Bindings,
    Filler,
    Frame,
    InstanceNamer,
    Pattern,
    instantiate,
    parse_pattern,
    rewrite_concept,
    unify,
)

PREFERENCE_TOLERANCE = 1e-9

IS_A = "is_a"
PART_OF = "part_of"


@dataclass(frozen=True)
class EventSchema:
    name: str
    trigger: Optional[Pattern] = None
    preconditions: tuple[Pattern, ...] = ()
    effects: tuple[Pattern, ...] = ()
    goal: Optional[Pattern] = None


@dataclass(frozen=True)
class PlanLibrary:
    name: str
    events: dict[str, EventSchema]
    links: tuple[tuple[str, str, str], ...]

    def parents(self, event: str) -> list[tuple[str, str]]:
        return sorted((parent, kind) for child, parent, kind in self.links if child == event)


@dataclass(frozen=True)
class Intention:
    """A recognized intention: goal frame, normalized preference, explanation path."""

    frame: Frame
    preference: float
    explanation: tuple[str, ...]
    event: str
    preconditions: tuple[Pattern, ...] = ()
    library: str = ""


@dataclass(frozen=True)
class BeliefModel:
    """The system's record of the speaker: committed intentions, open goals, history."""

    committed: tuple[Intention, ...] = ()
    open_goals: tuple[Pattern, ...] = ()
    history: tuple[tuple[int, Frame], ...] = ()

    def next_turn(self) -> int:
        return self.history[-1][0] + 1 if self.history else 1


def load_plan_library(source) -> PlanLibrary:
    """Load and validate a plan library from a JSON file path or parsed dict.

    Raises PlanLibraryError on duplicate events, dangling links, or a
    cycle in either link relation.
    """
    if isinstance(source, (str, Path)):
        data = json.loads(Path(source).read_text(encoding="utf-8"))
    else:
        data = source
    name = data.get("name") or "unnamed"
    events: dict[str, EventSchema] = {}
    for spec in data.get("events", []):
        if spec["name"] in events:
            raise PlanLibraryError(f"{name}: duplicate event {spec['name']!r}")
        events[spec["name"]] = EventSchema(
            name=spec["name"],
            trigger=parse_pattern(spec["trigger"]) if spec.get("trigger") else None,
            preconditions=tuple(parse_pattern(p) for p in spec.get("preconditions", ())),
            effects=tuple(parse_pattern(p) for p in spec.get("effects", ())),
            goal=parse_pattern(spec["goal"]) if spec.get("goal") else None,
        )
    links: list[tuple[str, str, str]] = []
    for child, parent, kind in data.get("links", []):
        if kind not in (IS_A, PART_OF):
            raise PlanLibraryError(f"{name}: unknown link kind {kind!r}")
        for endpoint in (child, parent):
            if endpoint not in events:
                raise PlanLibraryError(f"{name}: link references unknown event {endpoint!r}")
        links.append((child, parent, kind))
    library = PlanLibrary(name, events, tuple(links))
    for kind in (IS_A, PART_OF):
        _check_acyclic(library, kind)
    for event in events.values():
        if event.trigger is not None and event.goal is None:
            raise PlanLibraryError(f"{name}: trigger event {event.name!r} has no goal")
    return library


def _check_acyclic(library: PlanLibrary, kind: str) -> None:
    edges: dict[str, list[str]] = {}
    for child, parent, k in library.links:
        if k == kind:
            edges.setdefault(child, []).append(parent)
    visiting: set[str] = set()
    done: set[str] = set()

    def visit(node: str) -> None:
        if node in done:
            return
        if node in visiting:
            raise PlanLibraryError(f"{library.name}: {kind} links contain a cycle at {node!r}")
        visiting.add(node)
        for parent in edges.get(node, ()):
            visit(parent)
        visiting.discard(node)
        done.add(node)

    for node in list(edges):
        visit(node)


def activate_plan_library(switch) -> PlanLibrary:
    """Return the plan library a context switch activates."""
    library = getattr(switch, "plan_library", None)
    if not isinstance(library, PlanLibrary):
        name = getattr(switch, "plan_library_id", None) or "<missing>"
        raise ConfigurationError(f"plan library {name!r} is not loaded")
    return library


def explanation_paths(library: PlanLibrary, event: str) -> list[tuple[str, ...]]:
    """All upward link chains from an event to a root, event included."""
    paths: list[tuple[str, ...]] = []

    def climb(node: str, trail: tuple[str, ...]) -> None:
        parents = library.parents(node)
        if not parents:
            paths.append(trail)
            return
        for parent, _kind in parents:
            climb(parent, trail + (parent,))

    climb(event, (event,))
    return paths


def specificity(path: Sequence[str], bindings: Bindings) -> float:
    """Raw explanation score: path depth plus bindings consumed."""
    return float(len(path) + len(bindings))


def _rewrite_speaker(value: Filler) -> Filler:
    return rewrite_concept(value, "*i", "*speaker")


def recognize_intention(
    frame: Frame,
    library: PlanLibrary,
    beliefs: Optional[BeliefModel] = None,
    namer: Optional[InstanceNamer] = None,
) -> list[Intention]:
    """Abductively explain a situated frame; returns preference-ranked intentions.

    The belief model rides along for callers that keep one per session;
    the specificity scoring itself is belief-independent.  An empty list
    is the normal no-explanation outcome.
    """
    if frame.slot(":situation") is None:
        raise ValueError(f"frame {frame.instance} is not situated")
    namer = namer or InstanceNamer()

    raw: list[tuple[float, str, tuple[str, ...], Bindings]] = []
    for event_name in sorted(library.events):
        event = library.events[event_name]
        if event.trigger is None:
            continue
        bindings = unify(event.trigger, frame)
        if bindings is None:
            continue
        for path in sorted(explanation_paths(library, event_name)):
            raw.append((specificity(path, bindings), event_name, path, bindings))
    if not raw:
        return []

    weights = [math.exp(score) for score, *_ in raw]
    total = sum(weights)

    speaker_agent = _rewrite_speaker(frame.slot(":agent")) if frame.slot(":agent") else None
    intentions = []
    for (score, event_name, path, bindings), weight in zip(raw, weights):
        event = library.events[event_name]
        rewritten = {name: _rewrite_speaker(value) for name, value in bindings.items()}
        goal = instantiate(event.goal, rewritten, namer)
        if not isinstance(goal, Frame):
            raise PlanLibraryError(f"{library.name}: goal of {event_name!r} is not a frame")
        if goal.slot(":agent") is None and speaker_agent is not None:
            goal = goal.with_slot(":agent", speaker_agent)
        preconditions = tuple(event.preconditions)
        intentions.append(
            Intention(
                frame=goal,
                preference=weight / total,
                explanation=path,
                event=event_name,
                preconditions=preconditions,
                library=library.name,
            )
        )
    intentions.sort(key=lambda i: (-i.preference, i.event, i.explanation))
    return intentions


def pattern_satisfied(pattern: Pattern, kb) -> bool:
    """Flat satisfaction check: some knowledge-base fact carries the pattern's concept."""
    if kb is None:
        return False
    concept = getattr(pattern, "concept", None)
    if concept is None:
        return False
    return bool(kb.knows(concept))


def update_beliefs(
    beliefs: BeliefModel,
    chosen: Optional[Intention],
    frame: Frame,
    kb=None,
) -> BeliefModel:
    """Record a turn: append the frame, commit the intention, open unmet preconditions."""
    history = beliefs.history + ((beliefs.next_turn(), frame),)
    committed = beliefs.committed
    open_goals = beliefs.open_goals
    if chosen is not None:
        committed = committed + (chosen,)
        unmet = tuple(p for p in chosen.preconditions if not pattern_satisfied(p, kb))
        open_goals = open_goals + unmet
    return BeliefModel(committed, open_goals, history)
