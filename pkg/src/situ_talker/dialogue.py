"""The turn loop: context integration, deictic grounding, and template responses.

Every turn, whatever the input, produces exactly one TurnOutput whose
spoken text and display message are emitted as one atomic unit; the
dialogue state's displayed items always mirror the latest display.

Template gap language (``{...}`` inside spoken text, display titles, and
display items):

``{date}``                the session date, long form ("April 24, 1995")
``{label}``               the current situation's label
``{theme.area}``          a role path into the intention frame; concepts render
                          humanized ("*computer-science" -> "computer science")
``{kb:theme.area.route}`` walk the role path, then look the final attribute up
                          in the active knowledge base (by concept, else alias)
``{category}``/``{alternatives}``/``{options}``  clarification extras

A knowledge-base miss on a required gap raises internally and the turn
falls back to the apology template.
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional, Sequence, Union

from .errors import OrdinalRangeError
from .frames import Filler, Frame, InstanceNamer, Pattern, humanize, instantiate, iter_frames
from .knowledge import KnowledgeBase, ResponseTemplate, TemplateSet
from .plans import BeliefModel, Intention, PlanLibrary, recognize_intention, update_beliefs
from .recognizer import DEFAULT_NBEST, OOV_MARKER, Lexicon, recognize
from .semantics import (
    Candidate,
    Grammar,
    GrammarRule,
    GapCapture,
    PreferenceContext,
    RulePattern,
    Selection,
    attach_situation,
    disambiguate,
    parse,
    resolve_concepts,
)
from .world import ContextSwitch, EventKind, SituationEntry, SituationEvent, World, apply_event


class DeicticSource(IntEnum):
    """Referent sources, ordered by resolution priority (lower wins)."""

    OBJECT = 0
    DISPLAYED = 1
    MENTIONED = 2
    LOCATION = 3


@dataclass(frozen=True)
class DeicticCenter:
    referent: str  # a concept ("*book-1135") or a literal display string
    source: DeicticSource
    recency: int


@dataclass(frozen=True)
class DisplayMessage:
    title: str
    items: tuple[str, ...] = ()


EMPTY_DISPLAY = DisplayMessage("", ())


@dataclass(frozen=True)
class PendingQuestion:
    """The system asked an open question; the next bare answer fills the skeleton."""

    skeleton: Pattern


@dataclass(frozen=True)
class PendingChoice:
    """The system asked the user to pick between candidate interpretations."""

    category: str
    options: tuple[Candidate, ...]


Pending = Union[PendingQuestion, PendingChoice]


@dataclass
class DialogueState:
    """Linguistic plus non-linguistic context for one session; mutated serially."""

    world: World
    date: dt.date
    situation: Optional[SituationEntry] = None
    lexicon: Optional[Lexicon] = None
    kb: Optional[KnowledgeBase] = None
    plan_library: Optional[PlanLibrary] = None
    templates: Optional[TemplateSet] = None
    displayed: DisplayMessage = EMPTY_DISPLAY
    deictic_centers: list[DeicticCenter] = field(default_factory=list)
    frame_history: list[Frame] = field(default_factory=list)
    last_system_utterance: Optional[str] = None
    pending: Optional[Pending] = None
    beliefs: BeliefModel = field(default_factory=BeliefModel)
    namer: InstanceNamer = field(default_factory=InstanceNamer)
    turn_index: int = 0
    _recency: int = 0

    def ordered_centers(self) -> list[DeicticCenter]:
        """Centers in resolution order: priority class first, most recent within it."""
        return sorted(self.deictic_centers, key=lambda c: (c.source, -c.recency))

    def _resort(self) -> None:
        self.deictic_centers.sort(key=lambda c: (-c.recency, c.source))

    def add_center(self, referent: str, source: DeicticSource) -> None:
        self._recency += 1
        self.deictic_centers.append(DeicticCenter(referent, source, self._recency))
        self._resort()

    def clear_centers(self, *sources: DeicticSource) -> None:
        if sources:
            self.deictic_centers = [c for c in self.deictic_centers if c.source not in sources]
        else:
            self.deictic_centers = []


@dataclass(frozen=True)
class TurnOutput:
    """One turn's atomic result: synchronized spoken and display channels."""

    spoken: str
    display: DisplayMessage
    state: DialogueState
    kind: str = "answer"

    def to_payload(self) -> dict:
        return {
            "spoken": self.spoken,
            "display": {"title": self.display.title, "items": list(self.display.items)},
            "kind": self.kind,
        }


def new_dialogue_state(world: World, date: Optional[dt.date] = None) -> DialogueState:
    return DialogueState(world=world, date=date or world.date)


# --- builtin templates -------------------------------------------------------

BUILTIN_TEMPLATES = TemplateSet(
    "builtin",
    {
        "clarify-rephrase": ResponseTemplate("clarify-rephrase", "I'm sorry. Could you rephrase that?"),
        "clarify-choice": ResponseTemplate(
            "clarify-choice",
            "Which kind of {category}, {alternatives}?",
            "Please choose",
            ("{options}",),
        ),
        "clarify-range": ResponseTemplate("clarify-range", "Please choose an item from the displayed list."),
        "clarify-deictic": ResponseTemplate("clarify-deictic", "I am not sure what you are referring to."),
        "fallback": ResponseTemplate("fallback", "I am not sure how to answer that."),
        "prompt-again": ResponseTemplate("prompt-again", "I did not catch that. Please say it again."),
        "no-code": ResponseTemplate("no-code", "I do not recognize that code."),
        "already-here": ResponseTemplate("already-here", "You are already at {label}."),
        "apology": ResponseTemplate("apology", "I don't have that information."),
        "no-situation": ResponseTemplate("no-situation", "Please scan a code first."),
    },
)


def _lookup_template(state: DialogueState, name: str) -> ResponseTemplate:
    if state.templates is not None:
        template = state.templates.get(name)
        if template is not None:
            return template
    template = BUILTIN_TEMPLATES.get(name)
    if template is None:
        return BUILTIN_TEMPLATES.templates["fallback"]
    return template


# --- deictic resolution ------------------------------------------------------

DEMONSTRATIVES = {"*this", "*that", "*here", "*it"}
DATE_DEICTICS = {"*today": 0, "*tomorrow": 1, "*yesterday": -1}

UNRESOLVED = "*unresolved"

_ITEM_NUMBER = re.compile(r"^\s*\d+[.)]\s*")


def strip_item_number(item: str) -> str:
    return _ITEM_NUMBER.sub("", item).strip()


def resolve_deictics(frame: Frame, state: DialogueState) -> Frame:
    """Ground demonstratives, relative dates, and ordinal list references.

    Unresolvable deictics are replaced by an ``*unresolved`` marker frame
    (kept, so the caller can ask for clarification); an ordinal outside
    the displayed list raises OrdinalRangeError.
    """
    grounded = _ground(frame, state)
    assert isinstance(grounded, Frame)
    return grounded


def _ground(filler: Filler, state: DialogueState) -> Filler:
    if not isinstance(filler, Frame):
        return filler

    if filler.frame_type in DATE_DEICTICS:
        offset = DATE_DEICTICS[filler.frame_type]
        return (state.date + dt.timedelta(days=offset)).isoformat()

    if filler.frame_type in DEMONSTRATIVES:
        centers = state.ordered_centers()
        if not centers:
            return Frame(UNRESOLVED, state.namer.fresh(UNRESOLVED), {":expression": filler.frame_type})
        referent = centers[0].referent
        if referent.startswith("*"):
            return state.namer.frame(referent)
        return strip_item_number(referent)

    slots = {role: _ground(sub, state) for role, sub in filler.slots.items()}
    ordinal = slots.get(":ordinal")
    if isinstance(ordinal, int) and ":referent" not in slots:
        items = state.displayed.items
        if not 1 <= ordinal <= len(items):
            raise OrdinalRangeError(ordinal, len(items))
        slots[":referent"] = strip_item_number(items[ordinal - 1])
    return Frame(filler.frame_type, filler.instance, slots)


def has_unresolved(frame: Frame) -> bool:
    return any(f.frame_type == UNRESOLVED for f in iter_frames(frame))


# --- template gap filling ------------------------------------------------------


class GapMiss(Exception):
    """A template gap could not be filled from bindings or the knowledge base."""


@dataclass
class GapContext:
    state: DialogueState
    frame: Optional[Frame] = None
    kb: Optional[KnowledgeBase] = None
    extras: dict[str, object] = field(default_factory=dict)


def _long_date(date: dt.date) -> str:
    return f"{date.strftime('%B')} {date.day}, {date.year}"


def _walk_roles(frame: Optional[Frame], roles: Sequence[str]) -> Filler:
    current: Filler = frame if frame is not None else ""
    if frame is None:
        raise GapMiss("no frame to fill from")
    for role in roles:
        if not isinstance(current, Frame):
            raise GapMiss(f"role path stops early at {role!r}")
        nxt = current.slot(role)
        if nxt is None:
            raise GapMiss(f"frame has no {role!r} slot")
        current = nxt
    return current


def _render(filler: Filler) -> str:
    if isinstance(filler, Frame):
        return humanize(filler.frame_type)
    return str(filler)


def resolve_gap(expr: str, ctx: GapContext):
    """Resolve one gap expression; returns a string or a list of strings."""
    if expr in ctx.extras:
        return ctx.extras[expr]
    if expr == "date":
        return _long_date(ctx.state.date)
    if expr == "label":
        if ctx.state.situation is None:
            raise GapMiss("no active situation")
        return ctx.state.situation.label
    if expr.startswith("kb:"):
        parts = expr[3:].split(".")
        if len(parts) < 2:
            raise GapMiss(f"kb gap needs a role path and attribute: {expr!r}")
        roles, attribute = parts[:-1], parts[-1]
        filler = _walk_roles(ctx.frame, roles)
        key = filler.frame_type if isinstance(filler, Frame) else str(filler)
        if ctx.kb is None:
            raise GapMiss("no active knowledge base")
        value = ctx.kb.attr(key, attribute)
        if value is None:
            raise GapMiss(f"knowledge base {ctx.kb.name!r} has no {attribute!r} for {key!r}")
        return value
    return _render(_walk_roles(ctx.frame, expr.split(".")))


_GAP = re.compile(r"\{([^{}]+)\}")


def fill_text(text: str, ctx: GapContext) -> str:
    def sub(match: re.Match) -> str:
        value = resolve_gap(match.group(1), ctx)
        if isinstance(value, list):
            return ", ".join(str(v) for v in value)
        return str(value)

    return _GAP.sub(sub, text)


def fill_items(items: Sequence[str], ctx: GapContext) -> tuple[str, ...]:
    filled: list[str] = []
    for item in items:
        single = _GAP.fullmatch(item.strip())
        if single:
            value = resolve_gap(single.group(1), ctx)
            if isinstance(value, list):
                filled.extend(str(v) for v in value)
                continue
            filled.append(str(value))
        else:
            filled.append(fill_text(item, ctx))
    return tuple(filled)


# --- response generation --------------------------------------------------------


def _finalize(
    state: DialogueState,
    spoken: str,
    display: Optional[DisplayMessage],
    kind: str,
    expects: Optional[Pattern] = None,
) -> TurnOutput:
    """Emit the turn's single output and keep state mirrors consistent."""
    if display is None:
        display = state.displayed  # turns without new content keep the screen
    elif display is not state.displayed:
        state.clear_centers(DeicticSource.DISPLAYED)
        for item in display.items:
            state.add_center(item, DeicticSource.DISPLAYED)
    state.displayed = display
    state.last_system_utterance = spoken
    state.turn_index += 1
    if expects is not None:
        state.pending = PendingQuestion(expects)
    return TurnOutput(spoken=spoken, display=display, state=state, kind=kind)


def _render_template(
    state: DialogueState,
    template: ResponseTemplate,
    ctx: GapContext,
    kind: str,
) -> TurnOutput:
    try:
        spoken = fill_text(template.spoken, ctx)
        title = fill_text(template.display_title, ctx) if template.display_title else ""
        items = fill_items(template.display_items, ctx)
    except GapMiss:
        apology = _lookup_template(state, "apology")
        return _finalize(state, apology.spoken, None, "apology")
    display = DisplayMessage(title, items) if (title or items) else None
    return _finalize(state, spoken, display, kind, expects=template.expects)


def generate_response(
    intention: Intention,
    kb: Optional[KnowledgeBase],
    templates: Optional[TemplateSet],
    state: DialogueState,
) -> TurnOutput:
    """Select and fill the template matching an intention.

    Template names are tried most-specific first: the intention concept
    plus its theme concept (``*intend-to-know/*location-of-bookshelf``),
    then the intention concept alone, then the generic fallback.
    """
    frame = intention.frame
    theme = frame.slot(":theme")
    names = []
    if isinstance(theme, Frame):
        names.append(f"{frame.frame_type}/{theme.frame_type}")
    names.append(frame.frame_type)

    template = None
    if templates is not None:
        for name in names:
            template = templates.get(name)
            if template is not None:
                break
    kind = "answer"
    if template is None:
        template = _lookup_template(state, "fallback")
        kind = "fallback"
    ctx = GapContext(state=state, frame=frame, kb=kb)
    return _render_template(state, template, ctx, kind)


# --- situation changes -----------------------------------------------------------


def on_situation_enter(state: DialogueState, switch: ContextSwitch) -> TurnOutput:
    """Swap the active context atomically and emit the situation's greeting."""
    if not switch.changed:
        template = _lookup_template(state, "already-here")
        ctx = GapContext(state=state, kb=state.kb)
        return _render_template(state, template, ctx, "no-change")

    state.situation = switch.entry
    state.lexicon = switch.dictionary
    state.kb = switch.knowledge_base
    state.plan_library = switch.plan_library
    state.templates = switch.templates
    state.pending = None

    state.clear_centers()
    state.add_center(switch.entry.concept, DeicticSource.LOCATION)
    if switch.kind is EventKind.LOOK_AT:
        state.add_center(switch.entry.concept, DeicticSource.OBJECT)

    template = state.templates.get(switch.greeting)
    ctx = GapContext(state=state, kb=state.kb)
    return _render_template(state, template, ctx, "greeting")


# --- the step pipeline ------------------------------------------------------------


def _expectation_candidates(
    pending: PendingQuestion,
    answer_words: Sequence[str],
    grammar: Grammar,
    namer: InstanceNamer,
    hypothesis_score: float,
    kb: Optional[KnowledgeBase],
) -> list[Candidate]:
    """Interpret a bare answer against a pending question's frame skeleton.

    Only concepts the active knowledge base knows qualify: an open
    question invites an in-situation answer, not arbitrary text.
    """
    if not answer_words or OOV_MARKER in answer_words:
        return []
    text = " ".join(answer_words)
    rule = GrammarRule(
        pattern=(RulePattern(gap="ANSWER"),),
        skeleton=pending.skeleton,
        base_preference=0.8,
        index=-1,
        text="<expected answer>",
    )
    candidates = []
    concepts = [c for c in resolve_concepts(text, grammar) if kb is not None and kb.knows(c)]
    for i, concept in enumerate(concepts):
        value = namer.frame(concept)
        frame = instantiate(pending.skeleton, {}, namer, {"ANSWER": value})
        capture = GapCapture("ANSWER", text, value, alias_index=i)
        candidates.append(
            Candidate(
                frame=frame,
                rule=rule,
                hypothesis_rank=0,
                hypothesis_score=hypothesis_score,
                captures=(capture,),
                span=(0, len(answer_words)),
                alias_order=(i,),
            )
        )
    return candidates


def _choice_answer(
    pending: PendingChoice, answer_words: Sequence[str], grammar: Grammar
) -> Optional[Candidate]:
    """Match a bare answer against the offered interpretation options."""
    if not answer_words or OOV_MARKER in answer_words:
        return None
    text = " ".join(answer_words)
    concepts = set(resolve_concepts(text, grammar))
    for option in pending.options:
        captured = {c.value.frame_type for c in option.captures if isinstance(c.value, Frame)}
        if captured & concepts:
            return option
    return None


def _differing_capture(chosen: Candidate, alternatives: Sequence[Candidate]) -> Optional[GapCapture]:
    for capture in chosen.captures:
        for alt in alternatives:
            for other in alt.captures:
                if other.name == capture.name and other.value != capture.value:
                    return capture
    return chosen.captures[0] if chosen.captures else None


def _clarify_choice(state: DialogueState, selection: Selection) -> TurnOutput:
    options = (selection.chosen,) + selection.alternatives
    capture = _differing_capture(selection.chosen, selection.alternatives)
    category = capture.text if capture else "that"
    names = []
    for option in options:
        for c in option.captures:
            if isinstance(c.value, Frame):
                name = humanize(c.value.frame_type)
                if name not in names and name != category:
                    names.append(name)
    alternatives = "a " + " or ".join(names) if names else "one of those"
    listed = [f"{i}. {name[0].upper()}{name[1:]}" for i, name in enumerate(names, start=1)]
    template = _lookup_template(state, "clarify-choice")
    ctx = GapContext(
        state=state,
        kb=state.kb,
        extras={"category": category, "alternatives": alternatives, "options": listed},
    )
    output = _render_template(state, template, ctx, "clarify-choice")
    state.pending = PendingChoice(category, options)
    return output


def _mention_concepts(state: DialogueState, candidate: Candidate) -> None:
    for capture in candidate.captures:
        if isinstance(capture.value, Frame):
            state.add_center(capture.value.frame_type, DeicticSource.MENTIONED)


def step(state: DialogueState, user_input: Union[str, SituationEvent]) -> TurnOutput:
    """Run one turn: a situation event or an utterance, in arrival order."""
    if isinstance(user_input, SituationEvent):
        current = state.situation.situation_id if state.situation else None
        switch = apply_event(state.world, user_input, current)
        if switch is None:
            template = _lookup_template(state, "no-code")
            return _render_template(state, template, GapContext(state=state), "no-code")
        return on_situation_enter(state, switch)

    text = user_input.strip()
    if not text:
        template = _lookup_template(state, "prompt-again")
        return _render_template(state, template, GapContext(state=state), "prompt-again")
    if state.situation is None or state.lexicon is None:
        template = _lookup_template(state, "no-situation")
        return _render_template(state, template, GapContext(state=state), "no-situation")

    grammar = state.world.grammar
    nbest = recognize(text, state.lexicon, DEFAULT_NBEST)
    top = nbest.top
    pending, state.pending = state.pending, None

    selection: Optional[Selection] = None
    if isinstance(pending, PendingChoice):
        option = _choice_answer(pending, top.words, grammar) if top else None
        if option is not None:
            selection = Selection(chosen=option, score=0.0)

    if selection is None:
        candidates = parse(nbest, grammar, state.namer)
        if not candidates and isinstance(pending, PendingQuestion) and top is not None:
            candidates = _expectation_candidates(
                pending, top.words, grammar, state.namer, top.score, state.kb
            )
        selection = disambiguate(candidates, context=PreferenceContext(kb=state.kb))

    if selection.chosen is None:
        state.pending = pending  # the open question still stands
        template = _lookup_template(state, "clarify-rephrase")
        return _render_template(state, template, GapContext(state=state), "clarify")

    if selection.ambiguous:
        return _clarify_choice(state, selection)

    situated = attach_situation(selection.chosen.frame, state.situation, state.namer)
    try:
        grounded = resolve_deictics(situated, state)
    except OrdinalRangeError:
        template = _lookup_template(state, "clarify-range")
        return _render_template(state, template, GapContext(state=state), "clarify-range")
    if has_unresolved(grounded):
        template = _lookup_template(state, "clarify-deictic")
        return _render_template(state, template, GapContext(state=state), "clarify")

    intentions = recognize_intention(grounded, state.plan_library, state.beliefs, state.namer)
    state.frame_history.append(grounded)
    _mention_concepts(state, selection.chosen)
    if not intentions:
        template = _lookup_template(state, "fallback")
        return _render_template(state, template, GapContext(state=state), "fallback")

    chosen = intentions[0]
    state.beliefs = update_beliefs(state.beliefs, chosen, grounded, state.kb)
    return generate_response(chosen, state.kb, state.templates, state)
