"""Merge transcript segments into a document, split translations back into
sentences, and establish the 1:1 original/translated mapping.

The splitter is rule-based and deterministic: a run of terminal punctuation
followed by whitespace-or-end closes a sentence for Latin-script languages;
for CJK languages the ideographic stops close a sentence wherever they
appear.  Splits are vetoed inside decimals and after known abbreviations.
A count mismatch between original segments and translated sentences is an
error, never a truncation: the video is excluded.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from dubkit.transcript import Transcript

LATIN_TERMINALS = frozenset(".!?")
CJK_TERMINALS = frozenset("。！？…")
# Characters that may trail the terminal punctuation and still belong to the
# closing sentence (quotes, brackets).
TRAILING_CLOSERS = frozenset("\"'”’»)]}」』")

_CJK_LANG_PREFIXES = ("zh", "ja", "ko")


class AlignmentMismatch(Exception):
    """Sentence counts differ after translation; the video must be excluded."""

    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"expected {expected} sentences after translation, got {got}")


@dataclass(frozen=True)
class AlignedSentence:
    """An original sentence, its translation, and its time slot.

    The slot runs from the segment's start timestamp to the next segment's
    start; the last slot ends at the video duration.
    """

    index: int
    original_text: str
    translated_text: str
    slot_start_ms: int
    slot_end_ms: int
    back_translated_text: str | None = None

    @property
    def slot_ms(self) -> int:
        return self.slot_end_ms - self.slot_start_ms


def default_abbreviations() -> frozenset[str]:
    """The abbreviation list shipped with the package (English)."""
    text = resources.files("dubkit.data").joinpath("abbreviations_en.txt").read_text("utf-8")
    return _parse_abbreviations(text)


def load_abbreviations(path: str | Path) -> frozenset[str]:
    """Load an abbreviation file: one token per line, ``#`` comments."""
    return _parse_abbreviations(Path(path).read_text("utf-8"))


def _parse_abbreviations(text: str) -> frozenset[str]:
    tokens = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens.add(line.rstrip(".").lower())
    return frozenset(tokens)


def merge_segments(t: Transcript) -> str:
    """Join segment texts with single spaces, in order."""
    return " ".join(seg.text for seg in t.segments)


def _is_cjk(language: str) -> bool:
    lang = language.lower()
    return any(lang == p or lang.startswith(p + "-") for p in _CJK_LANG_PREFIXES)


_WORD_BEFORE_DOT = re.compile(r"([A-Za-z]+)$")


def _splits_at(text: str, i: int, cjk: bool, abbreviations: frozenset[str]) -> bool:
    """Decide whether the terminal character at position ``i`` ends a sentence."""
    ch = text[i]
    if cjk:
        if ch in CJK_TERMINALS:
            return True
        # Latin terminals inside CJK text still need the whitespace rule.
    if ch not in LATIN_TERMINALS:
        return False
    nxt = text[i + 1] if i + 1 < len(text) else ""
    if nxt and not nxt.isspace() and nxt not in TRAILING_CLOSERS and nxt not in LATIN_TERMINALS:
        return False
    if ch == ".":
        # No split inside decimals: digit '.' digit.
        prev = text[i - 1] if i > 0 else ""
        if prev.isdigit() and nxt.isdigit():
            return False
        m = _WORD_BEFORE_DOT.search(text, 0, i)
        if m and m.group(1).lower() in abbreviations:
            return False
    return True


def split_sentences(
    text: str,
    language: str = "en",
    abbreviations: frozenset[str] | None = None,
) -> list[str]:
    """Split document text into sentences; deterministic for fixed inputs.

    Joining the result with single spaces reproduces ``text`` up to
    inter-sentence whitespace normalization.  Empty input yields an empty
    list.  Trailing text without a terminal mark becomes a final sentence.
    """
    if abbreviations is None:
        abbreviations = default_abbreviations()
    cjk = _is_cjk(language)
    terminals = (LATIN_TERMINALS | CJK_TERMINALS) if cjk else LATIN_TERMINALS

    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in terminals and _splits_at(text, i, cjk, abbreviations):
            # Consume the full terminal run plus trailing closers.
            j = i + 1
            while j < n and text[j] in terminals and (cjk or _splits_at(text, j, cjk, abbreviations) or text[j] in LATIN_TERMINALS):
                j += 1
            while j < n and text[j] in TRAILING_CLOSERS:
                j += 1
            sentence = text[start:j].strip()
            if sentence:
                sentences.append(sentence)
            start = j
            i = j
        else:
            i += 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def align(t: Transcript, translated_sentences: list[str]) -> list[AlignedSentence]:
    """Pair translated sentence i with segment i and its time slot.

    Raises :class:`AlignmentMismatch` when the counts differ; the caller
    records the video exclusion in category statistics.
    """
    expected = len(t.segments)
    got = len(translated_sentences)
    if expected != got:
        raise AlignmentMismatch(expected, got)
    aligned = []
    for pos, seg in enumerate(t.segments):
        slot_end = (
            t.segments[pos + 1].start_ms if pos + 1 < expected else t.video_duration_ms
        )
        aligned.append(
            AlignedSentence(
                index=seg.index,
                original_text=seg.text,
                translated_text=translated_sentences[pos],
                slot_start_ms=seg.start_ms,
                slot_end_ms=slot_end,
            )
        )
    return aligned
