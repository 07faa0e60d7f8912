"""Flat fact storage and the spoken/display response templates.

Knowledge bases are JSON fact arrays; a fact binds a concept (plus
optional surface aliases) to attribute values, which may be strings or
lists of strings.  Retrieval is lookup, not inference.

Template files hold one template per line::

    name: spoken "..." display "Title" ["item 1", "item 2"] expects "(*want ... <ANSWER>)"

``display`` and ``expects`` are optional.  Text may contain ``{gap}``
references filled from the intention frame, the knowledge base, or the
dialogue state; see dialogue.fill_gaps for the gap language.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .errors import TemplateError
from .frames import Pattern, parse_pattern

AttrValue = Union[str, list[str]]


@dataclass(frozen=True)
class Fact:
    concept: str
    attrs: dict[str, AttrValue]
    aliases: tuple[str, ...] = ()


class KnowledgeBase:
    """A named set of facts indexed by concept and by lowercase alias."""

    def __init__(self, name: str, facts: list[Fact]):
        self.name = name
        self.facts = list(facts)
        self._by_key: dict[str, Fact] = {}
        for fact in facts:
            if fact.concept in self._by_key:
                raise ValueError(f"knowledge base {name!r}: duplicate fact {fact.concept!r}")
            self._by_key[fact.concept] = fact
            for alias in fact.aliases:
                self._by_key.setdefault(alias.lower(), fact)

    def fact(self, key: str) -> Optional[Fact]:
        return self._by_key.get(key) or self._by_key.get(key.lower())

    def knows(self, key: str) -> bool:
        return self.fact(key) is not None

    def attr(self, key: str, attribute: str) -> Optional[AttrValue]:
        fact = self.fact(key)
        if fact is None:
            return None
        return fact.attrs.get(attribute)


def load_knowledge_base(path: str | Path, name: Optional[str] = None) -> KnowledgeBase:
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    facts = [
        Fact(
            concept=item["concept"],
            attrs=dict(item.get("attrs", {})),
            aliases=tuple(item.get("aliases", ())),
        )
        for item in data
    ]
    return KnowledgeBase(name or path.stem, facts)


@dataclass(frozen=True)
class ResponseTemplate:
    name: str
    spoken: str
    display_title: str = ""
    display_items: tuple[str, ...] = ()
    expects: Optional[Pattern] = None


@dataclass(frozen=True)
class TemplateSet:
    """Templates available in one situation (union of its message resources)."""

    name: str
    templates: dict[str, ResponseTemplate] = field(default_factory=dict)

    def get(self, name: str) -> Optional[ResponseTemplate]:
        return self.templates.get(name)

    def merged_with(self, other: "TemplateSet") -> "TemplateSet":
        combined = dict(self.templates)
        combined.update(other.templates)
        return TemplateSet(f"{self.name}+{other.name}", combined)


_QUOTED = r'"(?:[^"\\]|\\.)*"'
_TEMPLATE_LINE = re.compile(
    rf"^(?P<name>[^\s:]+):\s*spoken\s+(?P<spoken>{_QUOTED})"
    rf"(?:\s+display\s+(?P<title>{_QUOTED})\s*(?P<items>\[.*\])?)?"
    rf"(?:\s+expects\s+(?P<expects>{_QUOTED}))?\s*$"
)


def _unquote(token: str) -> str:
    return token[1:-1].replace('\\"', '"')


def parse_template(line: str) -> ResponseTemplate:
    m = _TEMPLATE_LINE.match(line)
    if not m:
        raise TemplateError(f"bad template line: {line!r}")
    items: tuple[str, ...] = ()
    if m.group("items"):
        try:
            parsed = json.loads(m.group("items"))
        except json.JSONDecodeError as exc:
            raise TemplateError(f"bad display items in {line!r}: {exc}") from exc
        items = tuple(str(i) for i in parsed)
    return ResponseTemplate(
        name=m.group("name"),
        spoken=_unquote(m.group("spoken")),
        display_title=_unquote(m.group("title")) if m.group("title") else "",
        display_items=items,
        expects=parse_pattern(_unquote(m.group("expects"))) if m.group("expects") else None,
    )


def load_templates(path: str | Path, name: Optional[str] = None) -> TemplateSet:
    path = Path(path)
    templates: dict[str, ResponseTemplate] = {}
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        template = parse_template(line)
        if template.name in templates:
            raise TemplateError(f"{path.name}: duplicate template {template.name!r}")
        templates[template.name] = template
    return TemplateSet(name or path.stem, templates)
