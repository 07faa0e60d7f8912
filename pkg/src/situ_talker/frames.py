"""Recursive slot/filler frames, instance naming, and pattern matching.

Frames are written in an s-expression form::

    (*want (:agent *i-1) (:theme (*learn (:agent *i-1) (:theme *computer-science-1))))

``*want-1`` names an instance of the concept ``*want``; a bare concept
atom like ``*computer-science`` in a pattern matches any instance of
that concept.  Patterns may additionally contain variables (``?who``)
and gap placeholders (``<TOPIC>``) that grammar rules bind at match
time.  Literals are quoted strings or integers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

Filler = Union["Frame", str, int]


@dataclass(eq=True)
class Frame:
    """An instance of a concept with role -> filler slots."""

    frame_type: str
    instance: str
    slots: dict[str, Filler] = field(default_factory=dict)

    def slot(self, role: str) -> Optional[Filler]:
        return self.slots.get(_role(role))

    def with_slot(self, role: str, filler: Filler) -> "Frame":
        slots = dict(self.slots)
        slots[_role(role)] = filler
        return Frame(self.frame_type, self.instance, slots)

    def __str__(self) -> str:
        return format_frame(self)


class InstanceNamer:
    """Per-concept monotone counters producing ``*type-k`` instance names.

    Owned by one session and used serially; never shared across sessions.
    """

    def __init__(self) -> None:
        self._counters: dict[str, int] = {}

    def fresh(self, concept: str) -> str:
        n = self._counters.get(concept, 0) + 1
        self._counters[concept] = n
        return f"{concept}-{n}"

    def frame(self, concept: str, slots: Optional[dict[str, Filler]] = None) -> Frame:
        return Frame(concept, self.fresh(concept), dict(slots or {}))


def _role(role: str) -> str:
    return role if role.startswith(":") else f":{role}"


def strip_counter(instance: str) -> str:
    """``*want-3`` -> ``*want``; names without a numeric suffix pass through."""
    head, sep, tail = instance.rpartition("-")
    if sep and tail.isdigit():
        return head
    return instance


# --- pattern node types -----------------------------------------------------


@dataclass(frozen=True)
class Var:
    """A pattern variable ``?name``."""

    name: str


@dataclass(frozen=True)
class Gap:
    """A grammar gap placeholder ``<NAME>`` inside a rule skeleton."""

    name: str


@dataclass(frozen=True)
class Atom:
    """A bare concept in a pattern; matches any instance of the concept."""

    concept: str


@dataclass(frozen=True)
class PatternFrame:
    """A structured pattern: concept plus role -> sub-pattern constraints."""

    concept: str
    slots: tuple[tuple[str, "Pattern"], ...]


Pattern = Union[Var, Gap, Atom, PatternFrame, str, int]


# --- s-expression parsing ---------------------------------------------------

_TOKEN = re.compile(r'\(|\)|"(?:[^"\\]|\\.)*"|[^\s()"]+')


def _tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text)


def _parse_atom(token: str) -> Pattern:
    if token.startswith('"'):
        return token[1:-1].replace('\\"', '"')
    if token.startswith("?"):
        return Var(token[1:])
    if token.startswith("<") and token.endswith(">"):
        return Gap(token[1:-1])
    if re.fullmatch(r"-?\d+", token):
        return int(token)
    if token.startswith("*"):
        return Atom(token)
    # bare word literal (dates, plain strings)
    return token


def _parse_expr(tokens: list[str], pos: int) -> tuple[Pattern, int]:
    token = tokens[pos]
    if token == ")":
        raise ValueError("unexpected ')' in frame expression")
    if token != "(":
        return _parse_atom(token), pos + 1

    head = tokens[pos + 1]
    if not head.startswith("*"):
        raise ValueError(f"expected concept after '(', got {head!r}")
    pos += 2
    slots: list[tuple[str, Pattern]] = []
    while tokens[pos] != ")":
        if tokens[pos] != "(":
            raise ValueError(f"expected slot '(:role ...)', got {tokens[pos]!r}")
        role = tokens[pos + 1]
        if not role.startswith(":"):
            raise ValueError(f"expected role keyword, got {role!r}")
        filler, pos = _parse_expr(tokens, pos + 2)
        if tokens[pos] != ")":
            raise ValueError(f"slot {role} not closed")
        slots.append((role, filler))
        pos += 1
    return PatternFrame(head, tuple(slots)), pos + 1


def parse_pattern(text: str) -> Pattern:
    """Parse an s-expression pattern (may contain variables and gaps)."""
    tokens = _tokenize(text)
    if not tokens:
        raise ValueError("empty frame expression")
    pattern, pos = _parse_expr(tokens, 0)
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in frame expression: {tokens[pos:]}")
    return pattern


def format_frame(value: Filler) -> str:
    """Render a frame (or literal filler) back to s-expression text."""
    if isinstance(value, Frame):
        if not value.slots:
            return value.instance
        inner = " ".join(f"({role} {format_frame(f)})" for role, f in value.slots.items())
        return f"({value.instance} {inner})"
    if isinstance(value, int):
        return str(value)
    if re.fullmatch(r"[^\s()\"]+", value):
        return value
    return '"' + value.replace('"', '\\"') + '"'


# --- matching and instantiation ----------------------------------------------

Bindings = dict[str, Filler]


def unify(pattern: Pattern, value: Filler, bindings: Optional[Bindings] = None) -> Optional[Bindings]:
    """First-order match of a pattern against a frame or literal.

    Returns the (extended) bindings on success, None on failure.  A
    structured pattern matches a frame that has at least the pattern's
    slots; extra frame slots are ignored.
    """
    b = dict(bindings or {})
    if _unify(pattern, value, b):
        return b
    return None


def _unify(pattern: Pattern, value: Filler, b: Bindings) -> bool:
    if isinstance(pattern, Var):
        if pattern.name in b:
            return _fillers_equal(b[pattern.name], value)
        b[pattern.name] = value
        return True
    if isinstance(pattern, Atom):
        return isinstance(value, Frame) and value.frame_type == pattern.concept
    if isinstance(pattern, PatternFrame):
        if not isinstance(value, Frame) or value.frame_type != pattern.concept:
            return False
        for role, sub in pattern.slots:
            if role not in value.slots:
                return False
            if not _unify(sub, value.slots[role], b):
                return False
        return True
    if isinstance(pattern, Gap):
        raise ValueError(f"gap <{pattern.name}> cannot appear in a match pattern")
    return _fillers_equal(pattern, value)


def _fillers_equal(a: Filler, b: Filler) -> bool:
    if isinstance(a, Frame) and isinstance(b, Frame):
        return a == b
    return type(a) is type(b) and a == b


class UnboundVariable(Exception):
    """Raised when an instantiation meets a variable with no binding."""

    def __init__(self, name: str):
        super().__init__(f"unbound pattern variable ?{name}")
        self.name = name


def instantiate(
    pattern: Pattern,
    bindings: Bindings,
    namer: InstanceNamer,
    gap_values: Optional[dict[str, Filler]] = None,
) -> Filler:
    """Build a concrete frame from a pattern.

    Bare concept atoms get fresh instances (one per distinct concept per
    call, so repeated ``*i`` in one skeleton shares a single instance).
    Slots whose pattern is an unbound variable are dropped; an unbound
    variable anywhere else raises UnboundVariable.
    """
    local: dict[str, Frame] = {}
    return _instantiate(pattern, bindings, namer, gap_values or {}, local)


def _instantiate(
    pattern: Pattern,
    bindings: Bindings,
    namer: InstanceNamer,
    gaps: dict[str, Filler],
    local: dict[str, Frame],
) -> Filler:
    if isinstance(pattern, Var):
        if pattern.name not in bindings:
            raise UnboundVariable(pattern.name)
        return bindings[pattern.name]
    if isinstance(pattern, Gap):
        if pattern.name not in gaps:
            raise ValueError(f"no capture for gap <{pattern.name}>")
        return gaps[pattern.name]
    if isinstance(pattern, Atom):
        if pattern.concept not in local:
            local[pattern.concept] = namer.frame(pattern.concept)
        return local[pattern.concept]
    if isinstance(pattern, PatternFrame):
        slots: dict[str, Filler] = {}
        for role, sub in pattern.slots:
            if isinstance(sub, Var) and sub.name not in bindings:
                continue
            slots[role] = _instantiate(sub, bindings, namer, gaps, local)
        return Frame(pattern.concept, namer.fresh(pattern.concept), slots)
    return pattern


def iter_frames(value: Filler) -> Iterator[Frame]:
    """Yield every frame in a filler tree, root first."""
    if isinstance(value, Frame):
        yield value
        for filler in value.slots.values():
            yield from iter_frames(filler)


def rewrite_concept(value: Filler, source: str, target: str) -> Filler:
    """Replace every instance of one concept with the same-counter instance of another.

    ``*i-1`` becomes ``*speaker-1``: the counter survives so co-reference
    is preserved across the rewrite.
    """
    if not isinstance(value, Frame):
        return value
    slots = {role: rewrite_concept(f, source, target) for role, f in value.slots.items()}
    if value.frame_type == source:
        counter = value.instance[len(source):]
        return Frame(target, target + counter, slots)
    return Frame(value.frame_type, value.instance, slots)


def structurally_equal(a: Filler, b: Filler) -> bool:
    """Frame equality modulo instance counters.

    Two frames are structurally equal when their concepts match and their
    slots match recursively; instance numbering is ignored.
    """
    if isinstance(a, Frame) and isinstance(b, Frame):
        if a.frame_type != b.frame_type or set(a.slots) != set(b.slots):
            return False
        return all(structurally_equal(f, b.slots[role]) for role, f in a.slots.items())
    return _fillers_equal(a, b)


def humanize(concept: str) -> str:
    """``*computer-science`` -> ``computer science`` (instance counters stripped)."""
    return strip_counter(concept).lstrip("*").replace("-", " ")
