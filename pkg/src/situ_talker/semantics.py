"""Loose pattern grammar over N-best hypotheses, plus preferential disambiguation.

Grammar files hold one rule per line::

    i want to learn <TOPIC> => (*want (:agent *i) (:theme (*learn (:agent *i) (:theme <TOPIC>)))) @ 1.0
    alias language => *programming-language | *natural-language

A rule pattern is a sequence of terminal words and gaps.  A gap captures
a contiguous, nonempty token span; the captured text resolves to one or
more concepts (through the alias table, or by hyphenating the words), and
each resolution yields its own candidate frame.  Gaps named ``ORD*``
capture a single ordinal word ("first" ... "tenth") as an integer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from .errors import ContractError, GrammarError
from .frames import (
    Filler,
    Frame,
    Gap,
    InstanceNamer,
    Pattern,
    instantiate,
    parse_pattern,
)
from .recognizer import NBestList, OOV_MARKER

# Candidates whose preference scores differ by less than this margin are
# ambiguous; the dialogue layer answers with a clarification question.
AMBIGUITY_MARGIN = 0.1

MAX_GAP_TOKENS = 4

ORDINAL_WORDS = {
    "first": 1, "second": 2, "third": 3, "fourth": 4, "fifth": 5,
    "sixth": 6, "seventh": 7, "eighth": 8, "ninth": 9, "tenth": 10,
}


@dataclass(frozen=True)
class RulePattern:
    """One pattern element: a terminal word or a named gap."""

    terminal: Optional[str] = None
    gap: Optional[str] = None

    @property
    def is_gap(self) -> bool:
        return self.gap is not None


@dataclass(frozen=True)
class GrammarRule:
    pattern: tuple[RulePattern, ...]
    skeleton: Pattern
    base_preference: float
    index: int
    text: str

    def gap_names(self) -> list[str]:
        return [p.gap for p in self.pattern if p.gap is not None]


@dataclass(frozen=True)
class Grammar:
    rules: tuple[GrammarRule, ...]
    aliases: dict[str, tuple[str, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class GapCapture:
    """What one gap matched: the surface text and the concept (or ordinal) chosen."""

    name: str
    text: str
    value: Filler
    alias_index: int = 0


@dataclass(frozen=True)
class Candidate:
    """A candidate interpretation of one hypothesis under one rule."""

    frame: Frame
    rule: GrammarRule
    hypothesis_rank: int
    hypothesis_score: float
    captures: tuple[GapCapture, ...]
    span: tuple[int, int]
    alias_order: tuple[int, ...] = ()

    @property
    def base_preference(self) -> float:
        return self.rule.base_preference


_RULE_LINE = re.compile(r"^(?P<pattern>[^=]+?)\s*=>\s*(?P<skeleton>.+?)\s*@\s*(?P<weight>-?\d+(?:\.\d+)?)$")
_ALIAS_LINE = re.compile(r"^alias\s+(?P<text>[a-z0-9' ]+?)\s*=>\s*(?P<concepts>.+)$")


def parse_rule(line: str, index: int) -> GrammarRule:
    m = _RULE_LINE.match(line)
    if not m:
        raise GrammarError(f"bad grammar rule: {line!r}")
    elements: list[RulePattern] = []
    for token in m.group("pattern").split():
        if token.startswith("<") and token.endswith(">"):
            elements.append(RulePattern(gap=token[1:-1]))
        else:
            elements.append(RulePattern(terminal=token.lower()))
    skeleton = parse_pattern(m.group("skeleton"))
    rule = GrammarRule(tuple(elements), skeleton, float(m.group("weight")), index, line)
    skeleton_gaps = {g.name for f in _walk(skeleton) if isinstance(f, Gap) for g in [f]}
    for name in rule.gap_names():
        if name not in skeleton_gaps:
            raise GrammarError(f"gap <{name}> not bound in skeleton: {line!r}")
    return rule


def _walk(pattern: Pattern):
    yield pattern
    if hasattr(pattern, "slots"):
        for _, sub in pattern.slots:
            yield from _walk(sub)


def load_grammar(path: str | Path) -> Grammar:
    rules: list[GrammarRule] = []
    aliases: dict[str, tuple[str, ...]] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        alias = _ALIAS_LINE.match(line)
        if alias:
            concepts = tuple(c.strip() for c in alias.group("concepts").split("|"))
            if not all(c.startswith("*") for c in concepts):
                raise GrammarError(f"alias targets must be concepts: {line!r}")
            aliases[alias.group("text").strip()] = concepts
            continue
        rules.append(parse_rule(line, len(rules)))
    return Grammar(tuple(rules), aliases)


def hyphenate(text: str) -> str:
    return "*" + "-".join(text.split())


def resolve_concepts(text: str, grammar: Grammar) -> tuple[str, ...]:
    """Concepts a captured span can denote: alias table first, else hyphenation."""
    return grammar.aliases.get(text, (hyphenate(text),))


def _match_pattern(
    pattern: Sequence[RulePattern], words: Sequence[str]
) -> list[dict[str, tuple[int, int]]]:
    """All anchored matches of a rule pattern; each match maps gap name -> token span."""
    results: list[dict[str, tuple[int, int]]] = []

    def advance(p: int, w: int, spans: dict[str, tuple[int, int]]) -> None:
        if p == len(pattern):
            if w == len(words):
                results.append(dict(spans))
            return
        element = pattern[p]
        if element.terminal is not None:
            if w < len(words) and words[w] == element.terminal:
                advance(p + 1, w + 1, spans)
            return
        for end in range(w + 1, min(len(words), w + MAX_GAP_TOKENS) + 1):
            spans[element.gap] = (w, end)
            advance(p + 1, end, spans)
            del spans[element.gap]

    advance(0, 0, {})
    return results


def match_rule(rule: GrammarRule, words: Sequence[str]) -> list[dict[str, tuple[int, int]]]:
    """Anchored matches of one rule against a word sequence."""
    matches = _match_pattern(rule.pattern, words)
    # Reject captures that swallowed an out-of-vocabulary marker.
    clean = []
    for spans in matches:
        if all(OOV_MARKER not in words[a:b] for a, b in spans.values()):
            clean.append(spans)
    return clean


def parse(nbest: NBestList, grammar: Grammar, namer: Optional[InstanceNamer] = None) -> list[Candidate]:
    """Match every grammar rule against every hypothesis.

    Returns one candidate per (hypothesis, rule, gap split, concept
    resolution); an empty list is the normal no-parse outcome.
    """
    if not grammar.rules:
        raise ValueError("grammar has no rules")
    namer = namer or InstanceNamer()
    candidates: list[Candidate] = []
    for rank, hyp in enumerate(nbest.hypotheses):
        for rule in grammar.rules:
            for spans in match_rule(rule, hyp.words):
                for captures in _expand_captures(rule, spans, hyp.words, grammar, namer):
                    gap_values = {c.name: c.value for c in captures}
                    frame = instantiate(rule.skeleton, {}, namer, gap_values)
                    if not isinstance(frame, Frame):
                        raise GrammarError(f"skeleton of rule {rule.index} is not a frame")
                    candidates.append(
                        Candidate(
                            frame=frame,
                            rule=rule,
                            hypothesis_rank=rank,
                            hypothesis_score=hyp.score,
                            captures=tuple(captures),
                            span=(0, len(hyp.words)),
                            alias_order=tuple(c.alias_index for c in captures),
                        )
                    )
    return candidates


def _expand_captures(rule, spans, words, grammar, namer) -> list[list[GapCapture]]:
    combos: list[list[GapCapture]] = [[]]
    for name in rule.gap_names():
        a, b = spans[name]
        text = " ".join(words[a:b])
        if name.startswith("ORD"):
            if b - a != 1 or text not in ORDINAL_WORDS:
                return []
            options: list[tuple[int, Filler, str]] = [(0, ORDINAL_WORDS[text], text)]
        else:
            options = [
                (i, namer.frame(concept), text)
                for i, concept in enumerate(resolve_concepts(text, grammar))
            ]
        combos = [
            existing + [GapCapture(name, text, value, alias_index=i)]
            for existing in combos
            for i, value, text in options
        ]
    return combos


# --- preferential disambiguation ---------------------------------------------


@dataclass(frozen=True)
class Preference:
    """A soft constraint: weight times a test over (candidate, context)."""

    name: str
    weight: float
    test: Callable[[Candidate, "PreferenceContext"], float]


@dataclass
class PreferenceContext:
    kb: Optional[object] = None  # duck-typed: needs .knows(concept) when present


def _match_strength(candidate: Candidate, _ctx: PreferenceContext) -> float:
    return candidate.base_preference + candidate.hypothesis_score


def _kb_membership(candidate: Candidate, ctx: PreferenceContext) -> float:
    concepts = [c.value.frame_type for c in candidate.captures if isinstance(c.value, Frame)]
    if ctx.kb is None or not concepts:
        return 0.0
    return 1.0 if all(ctx.kb.knows(concept) for concept in concepts) else 0.0


def default_preferences() -> list[Preference]:
    # kb-membership is deliberately weaker than the ambiguity margin so
    # knowledge-base coverage alone never silently settles a choice.
    return [
        Preference("match-strength", 1.0, _match_strength),
        Preference("kb-membership", 0.05, _kb_membership),
    ]


@dataclass(frozen=True)
class Selection:
    """Outcome of disambiguation; ``chosen is None`` means no parse."""

    chosen: Optional[Candidate]
    score: float = 0.0
    ambiguous: bool = False
    alternatives: tuple[Candidate, ...] = ()
    scores: tuple[float, ...] = ()

    @property
    def frame(self) -> Optional[Frame]:
        return self.chosen.frame if self.chosen else None


def disambiguate(
    candidates: Sequence[Candidate],
    preferences: Optional[Sequence[Preference]] = None,
    context: Optional[PreferenceContext] = None,
    margin: float = AMBIGUITY_MARGIN,
) -> Selection:
    """Score candidates by the weighted preference sum and pick the argmax.

    Ties break by hypothesis rank, then rule declaration order, then
    alias declaration order.  A runner-up with a structurally different
    frame within ``margin`` marks the selection ambiguous.
    """
    if not candidates:
        return Selection(None)
    preferences = default_preferences() if preferences is None else list(preferences)
    context = context or PreferenceContext()

    scored = [
        (sum(p.weight * p.test(c, context) for p in preferences), c)
        for c in candidates
    ]
    ranked = sorted(
        scored,
        key=lambda item: (
            -item[0],
            item[1].hypothesis_rank,
            item[1].rule.index,
            item[1].alias_order,
        ),
    )
    best_score, best = ranked[0]
    rivals = [
        (s, c)
        for s, c in ranked[1:]
        if best_score - s < margin and not _same_meaning(best, c)
    ]
    return Selection(
        chosen=best,
        score=best_score,
        ambiguous=bool(rivals),
        alternatives=tuple(c for _, c in rivals),
        scores=tuple(s for s, _ in ranked),
    )


def _same_meaning(a: Candidate, b: Candidate) -> bool:
    from .frames import structurally_equal

    return structurally_equal(a.frame, b.frame)


def attach_situation(frame: Frame, entry, namer: InstanceNamer) -> Frame:
    """Stamp the current situation into a frame as a fresh ``:situation`` instance.

    Raises ContractError when the frame is already situated.
    """
    if frame.slot(":situation") is not None:
        raise ContractError(f"frame {frame.instance} already has a :situation slot")
    return frame.with_slot(":situation", namer.frame(entry.concept))
