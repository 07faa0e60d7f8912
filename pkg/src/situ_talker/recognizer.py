"""Simulated speech front-end: noisy text in, N-best in-lexicon word sequences out.

Text with typos stands in for acoustics.  Each input token is matched
against the situation's lexicon by length-normalized Damerau-Levenshtein
distance (optimal string alignment variant); per-token candidates are
beam-combined into sequence hypotheses scored by the negated sum of
per-word distances, so 0.0 is a perfect transcription.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .errors import ConfigurationError

# A token farther than this normalized distance from every lexicon word
# is treated as out-of-vocabulary.
OOV_THRESHOLD = 0.5
OOV_MARKER = "<oov>"
OOV_COST = 1.0

# Candidate lexicon words kept per input token.
CANDIDATES_PER_TOKEN = 3

DEFAULT_NBEST = 5

_WORD = re.compile(r"[a-z0-9']+")


@dataclass(frozen=True)
class Lexicon:
    """A named recognition vocabulary: lowercase words plus optional phrases."""

    name: str
    words: frozenset[str]
    phrases: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self) -> None:
        if not self.words:
            raise ValueError(f"lexicon {self.name!r} is empty")
        for word in self.words:
            if not word or word != word.lower() or any(c.isspace() for c in word):
                raise ValueError(f"lexicon {self.name!r} entry {word!r} must be lowercase and whitespace-free")


@dataclass(frozen=True)
class Hypothesis:
    words: tuple[str, ...]
    score: float  # <= 0; negated sum of per-word normalized distances


@dataclass(frozen=True)
class NBestList:
    hypotheses: tuple[Hypothesis, ...]
    n: int

    @property
    def top(self) -> Optional[Hypothesis]:
        return self.hypotheses[0] if self.hypotheses else None


def load_lexicon(path: str | Path, name: Optional[str] = None) -> Lexicon:
    """Load a dictionary file: one word or quoted phrase per line, ``#`` comments."""
    path = Path(path)
    words: set[str] = set()
    phrases: list[tuple[str, ...]] = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith('"') and line.endswith('"') and len(line) > 1:
            parts = tuple(line[1:-1].lower().split())
            if len(parts) > 1:
                phrases.append(parts)
            words.update(parts)
        else:
            words.add(line.lower())
    return Lexicon(name or path.stem, frozenset(words), tuple(phrases))


def merge_lexicons(name: str, lexicons: Iterable[Lexicon]) -> Lexicon:
    """Union lexicon, e.g. the GLOBAL baseline vocabulary."""
    words: set[str] = set()
    phrases: list[tuple[str, ...]] = []
    for lex in lexicons:
        words.update(lex.words)
        for phrase in lex.phrases:
            if phrase not in phrases:
                phrases.append(phrase)
    return Lexicon(name, frozenset(words), tuple(phrases))


def tokenize(text: str) -> list[str]:
    return _WORD.findall(text.lower())


def damerau_levenshtein(a: str, b: str) -> int:
    """Edit distance with adjacent transpositions (optimal string alignment)."""
    if a == b:
        return 0
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return la or lb
    prev2: list[int] = []
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
                cur[j] = min(cur[j], prev2[j - 2] + 1)
        prev2, prev = prev, cur
    return prev[lb]


def normalized_distance(a: str, b: str) -> float:
    return damerau_levenshtein(a, b) / max(len(a), len(b))


def token_candidates(token: str, lexicon: Lexicon, k: int = CANDIDATES_PER_TOKEN) -> list[tuple[str, float]]:
    """The k nearest lexicon words within the OOV threshold, else the OOV marker."""
    scored = sorted(
        ((normalized_distance(token, word), word) for word in sorted(lexicon.words)),
        key=lambda pair: (pair[0], pair[1]),
    )
    near = [(word, dist) for dist, word in scored[:k] if dist <= OOV_THRESHOLD]
    if not near:
        return [(OOV_MARKER, OOV_COST)]
    return near


def recognize(raw: str, lexicon: Lexicon, n: int = DEFAULT_NBEST) -> NBestList:
    """Recognize raw text into the top-n in-lexicon word sequences.

    Deterministic: equal-cost sequences are ordered lexicographically.
    Raises ValueError on input that is empty after trimming.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    tokens = tokenize(raw)
    if not tokens:
        raise ValueError("empty utterance")

    per_token = [token_candidates(t, lexicon) for t in tokens]

    # Additive per-token costs make prefix pruning exact: keeping the best n
    # prefixes (by cost, then lexicographic words) preserves the final top-n.
    beam: list[tuple[float, tuple[str, ...]]] = [(0.0, ())]
    for candidates in per_token:
        extended = [
            (cost + word_cost, words + (word,))
            for cost, words in beam
            for word, word_cost in candidates
        ]
        extended.sort(key=lambda item: (item[0], item[1]))
        beam = extended[: max(n, CANDIDATES_PER_TOKEN)]

    hypotheses = tuple(Hypothesis(words, -cost) for cost, words in beam[:n])
    return NBestList(hypotheses, n)


def perplexity(lexicon: Lexicon) -> float:
    """Effective branching factor under a uniform word model: the vocabulary size."""
    return float(len(lexicon.words))


def activate_dictionary(switch) -> Lexicon:
    """Return the lexicon a context switch activates.

    Raises ConfigurationError when the switch does not carry a resolved
    lexicon (the situation table named an unknown dictionary).
    """
    lexicon = getattr(switch, "dictionary", None)
    if not isinstance(lexicon, Lexicon):
        name = getattr(switch, "dictionary_id", None) or "<missing>"
        raise ConfigurationError(f"dictionary {name!r} is not loaded")
    return lexicon
