"""The simulated physical world: situations, coded objects, and the situation table.

A world is a directory bundle::

    <world>/
        world.json            situation table, adjacency, objects, clock
        grammar.txt           pattern grammar shared by the world's situations
        dictionaries/*.txt    recognition lexicons, one per dictionary id
        knowledge/*.json      knowledge bases
        plans/*.json          plan libraries
        templates/*.txt       message resources (response templates)

``world.json`` schema (version 1)::

    {"version": 1, "name": ..., "date": "YYYY-MM-DD", "start": <id>,
     "situations": [{"id", "label", "concept", "dictionary",
                     "knowledge_base", "plan_library", "greeting",
                     "resources": [...], "adjacent": [...]}, ...],
     "objects": [{"id", "label", "description"}, ...]}

Loading validates every cross-reference, so a loaded world never
produces dangling-asset failures at runtime.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

from .errors import WorldLoadError
from .knowledge import KnowledgeBase, TemplateSet, load_knowledge_base, load_templates
from .plans import PlanLibrary, load_plan_library
from .recognizer import Lexicon, load_lexicon, merge_lexicons
from .semantics import Grammar, load_grammar

SCHEMA_VERSION = 1


class EventKind(Enum):
    ENTER = "enter"
    LOOK_AT = "look_at"


@dataclass(frozen=True)
class SituationEvent:
    """A detected code: the user entered a place or looked at an object."""

    kind: EventKind
    target: int
    timestamp: int = 0


@dataclass(frozen=True)
class SituationEntry:
    """One situation-table row: an ID bound to its message and language resources."""

    situation_id: int
    label: str
    concept: str
    message_resources: tuple[str, ...]
    dictionary_id: str
    knowledge_base_id: str
    plan_library_id: str
    greeting: str
    adjacent: tuple[int, ...] = ()


@dataclass(frozen=True)
class WorldObject:
    object_id: int
    label: str
    description: str = ""


@dataclass
class World:
    """Immutable after load; shared read-only by any number of sessions."""

    name: str
    date: dt.date
    start: int
    situations: dict[int, SituationEntry]
    objects: dict[int, WorldObject]
    grammar: Grammar
    lexicons: dict[str, Lexicon]
    knowledge: dict[str, KnowledgeBase]
    plan_libraries: dict[str, PlanLibrary]
    templates: dict[str, TemplateSet]

    def entry_templates(self, entry: SituationEntry) -> TemplateSet:
        merged = TemplateSet(entry.label, {})
        for resource in entry.message_resources:
            merged = merged.merged_with(self.templates[resource])
        return merged


@dataclass(frozen=True)
class ContextSwitch:
    """The asset bundle a situation event activates, resolved atomically.

    Every resolved asset comes from the same situation entry, so
    downstream modules can never mix contexts.
    """

    entry: SituationEntry
    kind: EventKind
    changed: bool
    dictionary: Lexicon
    knowledge_base: KnowledgeBase
    plan_library: PlanLibrary
    templates: TemplateSet
    greeting: str

    @property
    def dictionary_id(self) -> str:
        return self.entry.dictionary_id

    @property
    def plan_library_id(self) -> str:
        return self.entry.plan_library_id


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise WorldLoadError(f"{where}: missing required key {key!r}")
    return data[key]


def load_world(path: str | Path) -> World:
    """Load a world bundle directory (or its world.json) and validate it.

    Raises WorldLoadError naming the offending key on any schema
    violation or dangling reference.
    """
    path = Path(path)
    if path.is_file():
        root = path.parent
        document = path
    else:
        root = path
        document = path / "world.json"
    if not document.exists():
        raise WorldLoadError(f"world file {document} does not exist")
    data = json.loads(document.read_text(encoding="utf-8"))

    version = data.get("version")
    if version != SCHEMA_VERSION:
        raise WorldLoadError(f"unsupported world schema version {version!r}")
    name = _require(data, "name", "world")
    try:
        date = dt.date.fromisoformat(_require(data, "date", "world"))
    except ValueError as exc:
        raise WorldLoadError(f"world {name!r}: bad date: {exc}") from exc

    lexicons = {p.stem: load_lexicon(p) for p in sorted((root / "dictionaries").glob("*.txt"))}
    knowledge = {p.stem: load_knowledge_base(p) for p in sorted((root / "knowledge").glob("*.json"))}
    plan_libraries = {}
    for p in sorted((root / "plans").glob("*.json")):
        library = load_plan_library(p)
        plan_libraries[p.stem] = library
    templates = {p.stem: load_templates(p) for p in sorted((root / "templates").glob("*.txt"))}
    grammar = load_grammar(root / "grammar.txt")

    situations: dict[int, SituationEntry] = {}
    for raw in _require(data, "situations", "world"):
        sid = _require(raw, "id", "situation")
        where = f"situation {sid}"
        if sid in situations:
            raise WorldLoadError(f"world {name!r}: duplicate situation id {sid}")
        entry = SituationEntry(
            situation_id=sid,
            label=_require(raw, "label", where),
            concept=_require(raw, "concept", where),
            message_resources=tuple(raw.get("resources", ())),
            dictionary_id=_require(raw, "dictionary", where),
            knowledge_base_id=_require(raw, "knowledge_base", where),
            plan_library_id=_require(raw, "plan_library", where),
            greeting=_require(raw, "greeting", where),
            adjacent=tuple(raw.get("adjacent", ())),
        )
        if entry.dictionary_id not in lexicons:
            raise WorldLoadError(f"{where}: references unknown dictionary {entry.dictionary_id!r}")
        if entry.knowledge_base_id not in knowledge:
            raise WorldLoadError(f"{where}: references unknown knowledge base {entry.knowledge_base_id!r}")
        if entry.plan_library_id not in plan_libraries:
            raise WorldLoadError(f"{where}: references unknown plan library {entry.plan_library_id!r}")
        for resource in entry.message_resources:
            if resource not in templates:
                raise WorldLoadError(f"{where}: references unknown resource {resource!r}")
        if not any(templates[r].get(entry.greeting) for r in entry.message_resources):
            raise WorldLoadError(f"{where}: greeting template {entry.greeting!r} not found in its resources")
        situations[sid] = entry

    objects: dict[int, WorldObject] = {}
    for raw in data.get("objects", ()):
        oid = _require(raw, "id", "object")
        objects[oid] = WorldObject(oid, _require(raw, "label", f"object {oid}"), raw.get("description", ""))

    for entry in situations.values():
        for neighbor in entry.adjacent:
            if neighbor not in situations:
                raise WorldLoadError(
                    f"situation {entry.situation_id}: adjacent id {neighbor} is not a known situation"
                )

    start = _require(data, "start", "world")
    if start not in situations:
        raise WorldLoadError(f"world {name!r}: start situation {start} is not defined")

    return World(
        name=name,
        date=date,
        start=start,
        situations=situations,
        objects=objects,
        grammar=grammar,
        lexicons=lexicons,
        knowledge=knowledge,
        plan_libraries=plan_libraries,
        templates=templates,
    )


def lookup_situation(world: World, object_id: int) -> Optional[SituationEntry]:
    """Exact situation-table lookup; None is the normal unknown-code outcome."""
    return world.situations.get(object_id)


def apply_event(
    world: World, event: SituationEvent, current: Optional[int] = None
) -> Optional[ContextSwitch]:
    """Resolve a situation event into the context bundle it activates.

    ``current`` is the session's present situation; re-detecting it
    yields a switch flagged unchanged.  An unknown target returns None
    (no context change) rather than raising.
    """
    entry = lookup_situation(world, event.target)
    if entry is None:
        return None
    return ContextSwitch(
        entry=entry,
        kind=event.kind,
        changed=event.target != current,
        dictionary=world.lexicons[entry.dictionary_id],
        knowledge_base=world.knowledge[entry.knowledge_base_id],
        plan_library=world.plan_libraries[entry.plan_library_id],
        templates=world.entry_templates(entry),
        greeting=entry.greeting,
    )


class WorldStore:
    """All world bundles under one assets root, loaded eagerly and validated."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.worlds: dict[str, World] = {}
        for candidate in sorted(self.root.iterdir()):
            if (candidate / "world.json").exists():
                world = load_world(candidate)
                self.worlds[world.name] = world
        if not self.worlds:
            raise WorldLoadError(f"no world bundles under {self.root}")

    def world(self, name: str) -> World:
        if name not in self.worlds:
            raise KeyError(f"unknown world {name!r}")
        return self.worlds[name]

    def global_lexicon(self) -> Lexicon:
        """The union of every dictionary in every world: the unsituated baseline."""
        all_lexicons = [
            lex for world in self.worlds.values() for _, lex in sorted(world.lexicons.items())
        ]
        return merge_lexicons("GLOBAL", all_lexicons)


def bundled_assets_root() -> Path:
    return Path(__file__).parent / "assets"
