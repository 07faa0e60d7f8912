from __future__ import annotations

import json

import pytest

from situ_talker.errors import WorldLoadError
from situ_talker.world import (
    EventKind,
    SituationEvent,
    apply_event,
    load_world,
    lookup_situation,
)


def test_bundled_library_world_has_situation_table_rows(library) -> None:
    assert library.date.isoformat() == "1995-04-24"
    assert {1, 11, 113, 1135} <= set(library.situations)
    assert library.situations[1].label == "Library front"
    assert "Computer science" in library.situations[11].label
    assert "Object-oriented languages" in library.situations[1135].label


def test_bundled_restaurant_world_has_signboard(restaurant) -> None:
    entry = restaurant.situations[restaurant.start]
    assert entry.label == "Maxim's de Paris"
    assert entry.dictionary_id == "DictMaxims"


def test_lookup_table_bindings_match_situation_ids(library) -> None:
    shelf = lookup_situation(library, 11)
    assert shelf.dictionary_id == "Dict11"
    assert shelf.knowledge_base_id == "Knowledge11"
    book = lookup_situation(library, 1135)
    assert book.dictionary_id == "Dict1135"
    assert book.knowledge_base_id == "Knowledge1135"
    assert "Object-oriented languages" in book.label


def test_lookup_unknown_id_is_none(library) -> None:
    assert lookup_situation(library, 4000) is None


def _world_doc(**overrides) -> dict:
    doc = {
        "version": 1,
        "name": "mini",
        "date": "1995-04-24",
        "start": 5,
        "situations": [
            {
                "id": 5,
                "label": "Spot",
                "concept": "*spot",
                "dictionary": "DictMini",
                "knowledge_base": "KnowledgeMini",
                "plan_library": "mini-plan",
                "greeting": "greet-mini",
                "resources": ["mini-guide"],
                "adjacent": [],
            }
        ],
        "objects": [],
    }
    doc.update(overrides)
    return doc


def _write_mini_world(root, doc) -> None:
    (root / "dictionaries").mkdir(parents=True)
    (root / "knowledge").mkdir()
    (root / "plans").mkdir()
    (root / "templates").mkdir()
    (root / "dictionaries" / "DictMini.txt").write_text("hello\nworld\n")
    (root / "knowledge" / "KnowledgeMini.json").write_text("[]")
    (root / "plans" / "mini-plan.json").write_text(json.dumps({"name": "mini-plan", "events": [], "links": []}))
    (root / "templates" / "mini-guide.txt").write_text('greet-mini: spoken "Hello."\n')
    (root / "grammar.txt").write_text("hello <TOPIC> => (*greet (:theme <TOPIC>)) @ 1.0\n")
    (root / "world.json").write_text(json.dumps(doc))


def test_minimal_world_loads(tmp_path) -> None:
    _write_mini_world(tmp_path, _world_doc())
    world = load_world(tmp_path)
    assert world.name == "mini"
    assert world.situations[5].label == "Spot"


def test_dangling_dictionary_reference_names_the_key(tmp_path) -> None:
    doc = _world_doc()
    doc["situations"][0]["dictionary"] = "DictX"
    _write_mini_world(tmp_path, doc)
    with pytest.raises(WorldLoadError, match="DictX"):
        load_world(tmp_path)


def test_unknown_adjacent_situation_rejected(tmp_path) -> None:
    doc = _world_doc()
    doc["situations"][0]["adjacent"] = [99]
    _write_mini_world(tmp_path, doc)
    with pytest.raises(WorldLoadError, match="99"):
        load_world(tmp_path)


def test_missing_greeting_template_rejected(tmp_path) -> None:
    doc = _world_doc()
    doc["situations"][0]["greeting"] = "greet-ghost"
    _write_mini_world(tmp_path, doc)
    with pytest.raises(WorldLoadError, match="greet-ghost"):
        load_world(tmp_path)


def test_bad_schema_version_rejected(tmp_path) -> None:
    _write_mini_world(tmp_path, _world_doc(version=99))
    with pytest.raises(WorldLoadError, match="version"):
        load_world(tmp_path)


def test_apply_event_resolves_full_bundle_atomically(library) -> None:
    switch = apply_event(library, SituationEvent(EventKind.ENTER, 1))
    assert switch.changed
    entry = switch.entry
    assert switch.dictionary.name == entry.dictionary_id == "Dict1"
    assert switch.knowledge_base.name == entry.knowledge_base_id == "Knowledge1"
    assert switch.plan_library.name == entry.plan_library_id == "library-front-plan"
    assert switch.greeting == entry.greeting
    assert switch.templates.get(entry.greeting) is not None


def test_apply_event_unknown_target_is_none(library) -> None:
    assert apply_event(library, SituationEvent(EventKind.ENTER, 4000)) is None


def test_apply_event_same_situation_is_flagged_unchanged(library) -> None:
    switch = apply_event(library, SituationEvent(EventKind.ENTER, 11), current=11)
    assert switch is not None and not switch.changed
    again = apply_event(library, SituationEvent(EventKind.ENTER, 11), current=1)
    assert again.changed


def test_every_lookup_is_unique_or_unknown(library) -> None:
    ids = list(library.situations)
    assert len(ids) == len(set(ids))
    for object_id in range(0, 1200):
        entry = lookup_situation(library, object_id)
        if entry is not None:
            assert entry.situation_id == object_id


def test_loaded_world_never_dangles_at_runtime(world_store) -> None:
    for world in world_store.worlds.values():
        for entry in world.situations.values():
            switch = apply_event(world, SituationEvent(EventKind.ENTER, entry.situation_id))
            assert switch.dictionary is not None
            assert switch.knowledge_base is not None
            assert switch.plan_library is not None
            assert switch.templates.get(entry.greeting) is not None


def test_store_rejects_unknown_world(world_store) -> None:
    with pytest.raises(KeyError):
        world_store.world("nope")
