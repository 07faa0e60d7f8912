from __future__ import annotations

import math
import random

import pytest

from situ_talker.errors import PlanLibraryError
from situ_talker.frames import Frame, InstanceNamer, iter_frames, unify
from situ_talker.knowledge import Fact, KnowledgeBase
from situ_talker.plans import (
    BeliefModel,
    PREFERENCE_TOLERANCE,
    PlanLibrary,
    activate_plan_library,
    load_plan_library,
    recognize_intention,
    update_beliefs,
)
from situ_talker.world import EventKind, SituationEvent, apply_event


def situated_want_learn(namer: InstanceNamer) -> Frame:
    i = namer.frame("*i")
    return Frame(
        "*want",
        namer.fresh("*want"),
        {
            ":agent": i,
            ":theme": Frame(
                "*learn",
                namer.fresh("*learn"),
                {":agent": i, ":theme": namer.frame("*computer-science")},
            ),
            ":situation": namer.frame("*library-front"),
        },
    )


# --- independent oracle: exhaustive (trigger, path) enumeration -----------------


def oracle_rank(library: PlanLibrary, frame: Frame) -> list[tuple[str, tuple[str, ...], float]]:
    parents: dict[str, list[str]] = {}
    for child, parent, _kind in library.links:
        parents.setdefault(child, []).append(parent)

    def paths_up(node: str) -> list[tuple[str, ...]]:
        ups = sorted(parents.get(node, []))
        if not ups:
            return [(node,)]
        collected = []
        for parent in ups:
            for tail in paths_up(parent):
                collected.append((node,) + tail)
        return collected

    raw = []
    for name in sorted(library.events):
        event = library.events[name]
        if event.trigger is None:
            continue
        bindings = unify(event.trigger, frame)
        if bindings is None:
            continue
        for path in sorted(paths_up(name)):
            raw.append((len(path) + len(bindings), name, path))
    if not raw:
        return []
    total = sum(math.exp(score) for score, *_ in raw)
    ranked = [
        (name, path, math.exp(score) / total) for score, name, path in raw
    ]
    ranked.sort(key=lambda item: (-item[2], item[0], item[1]))
    return ranked


def test_bundled_switch_loads_bookshelf_plan(library) -> None:
    switch = apply_event(library, SituationEvent(EventKind.ENTER, 11))
    plan = activate_plan_library(switch)
    assert plan.name == "comp-sci-bookshelf-plan"
    assert {"study", "search-book", "read-book"} <= set(plan.events)
    assert ("search-book", "study", "part_of") in plan.links


def test_library_front_plan_derives_intend_to_know(library) -> None:
    plan = library.plan_libraries["library-front-plan"]
    event = plan.events["want-to-learn"]
    goal = event.goal
    assert goal.concept == "*intend-to-know"


def test_cycle_in_links_is_load_error() -> None:
    doc = {
        "name": "cyclic",
        "events": [{"name": "a"}, {"name": "b"}],
        "links": [["a", "b", "is_a"], ["b", "a", "is_a"]],
    }
    with pytest.raises(PlanLibraryError):
        load_plan_library(doc)


def test_dangling_link_is_load_error() -> None:
    doc = {"name": "dangling", "events": [{"name": "a"}], "links": [["a", "ghost", "part_of"]]}
    with pytest.raises(PlanLibraryError):
        load_plan_library(doc)


def test_paper_style_intention_with_speaker_rewrite(library) -> None:
    namer = InstanceNamer()
    frame = situated_want_learn(namer)
    plan = library.plan_libraries["library-front-plan"]
    intentions = recognize_intention(frame, plan, BeliefModel(), namer)
    assert intentions
    top = intentions[0].frame
    assert top.frame_type == "*intend-to-know"
    agent = top.slot(":agent")
    assert agent.frame_type == "*speaker"
    assert agent.instance == "*speaker-1"  # counter carried over from *i-1
    theme = top.slot(":theme")
    assert theme.frame_type == "*location-of-bookshelf"
    assert theme.slot(":area").frame_type == "*computer-science"


def test_no_i_instance_survives_rewrite(library) -> None:
    namer = InstanceNamer()
    frame = situated_want_learn(namer)
    plan = library.plan_libraries["library-front-plan"]
    for intention in recognize_intention(frame, plan, BeliefModel(), namer):
        types = {f.frame_type for f in iter_frames(intention.frame)}
        assert "*i" not in types
        assert "*speaker" in types


def test_unsituated_frame_is_rejected(library) -> None:
    namer = InstanceNamer()
    plan = library.plan_libraries["library-front-plan"]
    with pytest.raises(ValueError):
        recognize_intention(namer.frame("*want"), plan, BeliefModel(), namer)


def test_unmatched_trigger_yields_empty_set(library) -> None:
    namer = InstanceNamer()
    frame = namer.frame("*sing")
    frame = frame.with_slot(":situation", namer.frame("*library-front"))
    plan = library.plan_libraries["library-front-plan"]
    assert recognize_intention(frame, plan, BeliefModel(), namer) == []


def test_deeper_explanation_ranks_first() -> None:
    doc = {
        "name": "depths",
        "events": [
            {"name": "root"},
            {"name": "mid"},
            {
                "name": "deep",
                "trigger": "(*do (:theme ?t))",
                "goal": "(*intend (:theme ?t))",
            },
            {
                "name": "shallow",
                "trigger": "(*do (:theme ?t))",
                "goal": "(*intend (:theme ?t))",
            },
        ],
        "links": [["deep", "mid", "part_of"], ["mid", "root", "part_of"]],
    }
    library = load_plan_library(doc)
    namer = InstanceNamer()
    frame = Frame("*do", namer.fresh("*do"), {":theme": "x", ":situation": namer.frame("*s")})
    intentions = recognize_intention(frame, library, BeliefModel(), namer)
    assert [i.event for i in intentions] == ["deep", "shallow"]
    oracle = oracle_rank(library, frame)
    assert [(i.event, i.explanation) for i in intentions] == [(e, p) for e, p, _ in oracle]
    for intention, (_, _, pref) in zip(intentions, oracle):
        assert intention.preference == pytest.approx(pref)


def _random_library(rng: random.Random) -> PlanLibrary:
    size = rng.randint(2, 20)
    events = []
    triggers = [
        "(*want (:agent ?a) (:theme ?t))",
        "(*want (:theme ?t))",
        "(*ask-where (:theme ?t))",
        "(*want (:agent ?a))",
    ]
    for i in range(size):
        spec: dict = {"name": f"e{i}"}
        if rng.random() < 0.5:
            spec["trigger"] = rng.choice(triggers)
            spec["goal"] = "(*intend (:theme ?t))" if "?t" in spec["trigger"] else "(*intend (:agent ?a))"
        events.append(spec)
    links = []
    for i in range(size):
        for _ in range(rng.randint(0, 2)):
            if i + 1 < size:
                parent = rng.randint(i + 1, size - 1)
                kind = rng.choice(["is_a", "part_of"])
                link = [f"e{i}", f"e{parent}", kind]
                if link not in links:
                    links.append(link)
    return load_plan_library({"name": "random", "events": events, "links": links})


def test_ranking_equals_exhaustive_enumeration_randomized() -> None:
    rng = random.Random(20250424)
    checked = 0
    for _ in range(200):
        library = _random_library(rng)
        namer = InstanceNamer()
        frame = Frame(
            "*want",
            namer.fresh("*want"),
            {
                ":agent": namer.frame("*i"),
                ":theme": namer.frame("*topic"),
                ":situation": namer.frame("*place"),
            },
        )
        intentions = recognize_intention(frame, library, BeliefModel(), namer)
        oracle = oracle_rank(library, frame)
        assert [(i.event, i.explanation) for i in intentions] == [(e, p) for e, p, _ in oracle]
        for intention, (_, _, pref) in zip(intentions, oracle):
            assert intention.preference == pytest.approx(pref)
        checked += 1
    assert checked == 200


def test_preferences_normalized_and_sorted(library) -> None:
    namer = InstanceNamer()
    frame = situated_want_learn(namer)
    plan = library.plan_libraries["library-front-plan"]
    intentions = recognize_intention(frame, plan, BeliefModel(), namer)
    total = sum(i.preference for i in intentions)
    assert total <= 1.0 + PREFERENCE_TOLERANCE
    assert all(0.0 <= i.preference <= 1.0 for i in intentions)
    keys = [(-i.preference, i.event, i.explanation) for i in intentions]
    assert keys == sorted(keys)


def test_intentions_reference_only_loaded_library_events(library) -> None:
    namer = InstanceNamer()
    frame = situated_want_learn(namer)
    for plan in library.plan_libraries.values():
        for intention in recognize_intention(frame, plan, BeliefModel(), namer):
            assert intention.event in plan.events
            assert set(intention.explanation) <= set(plan.events)
            assert intention.library == plan.name


def test_update_beliefs_commits_and_orders_history(library) -> None:
    namer = InstanceNamer()
    plan = library.plan_libraries["library-front-plan"]
    model = BeliefModel()

    frame1 = situated_want_learn(namer)
    chosen1 = recognize_intention(frame1, plan, model, namer)[0]
    model = update_beliefs(model, chosen1, frame1)
    assert len(model.committed) == 1
    assert len(model.history) == 1

    frame2 = situated_want_learn(namer)
    chosen2 = recognize_intention(frame2, plan, model, namer)[0]
    model = update_beliefs(model, chosen2, frame2)
    indexes = [i for i, _ in model.history]
    assert indexes == sorted(indexes) and len(set(indexes)) == 2
    assert model.history[0][1] is frame1
    assert model.history[1][1] is frame2


def test_update_beliefs_opens_unsatisfied_preconditions(library) -> None:
    namer = InstanceNamer()
    plan = library.plan_libraries["library-front-plan"]
    frame = situated_want_learn(namer)
    chosen = recognize_intention(frame, plan, BeliefModel(), namer)[0]
    assert chosen.event == "want-to-learn"

    empty_kb = KnowledgeBase("empty", [])
    model = update_beliefs(BeliefModel(), chosen, frame, empty_kb)
    assert any(getattr(p, "concept", None) == "*knows-location" for p in model.open_goals)

    satisfied_kb = KnowledgeBase("knows", [Fact("*knows-location", {})])
    model2 = update_beliefs(BeliefModel(), chosen, frame, satisfied_kb)
    assert not any(getattr(p, "concept", None) == "*knows-location" for p in model2.open_goals)
