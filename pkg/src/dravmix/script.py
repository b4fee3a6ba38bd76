"""Writing-system tagging for characters and whitespace-delimited tokens."""
from __future__ import annotations

import enum
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import List, Tuple


class ScriptTag(str, enum.Enum):
    LATIN = "Latin"
    KANNADA = "KannadaScript"
    TAMIL = "TamilScript"
    MALAYALAM = "MalayalamScript"
    DIGIT = "Digit"
    PUNCT = "Punct"
    OTHER = "Other"

    @property
    def is_letter_script(self) -> bool:
        return self in LETTER_SCRIPTS


LETTER_SCRIPTS = (ScriptTag.LATIN, ScriptTag.KANNADA, ScriptTag.TAMIL, ScriptTag.MALAYALAM)

BLOCKS = {
    ScriptTag.KANNADA: (0x0C80, 0x0CFF),
    ScriptTag.TAMIL: (0x0B80, 0x0BFF),
    ScriptTag.MALAYALAM: (0x0D00, 0x0D7F),
}


@dataclass(frozen=True)
class TaggedToken:
    token: str
    tag: ScriptTag
    byte_range: Tuple[int, int]
    char_range: Tuple[int, int]


def char_script(ch: str) -> ScriptTag:
    """Tag a single code point. Total over every Unicode scalar value."""
    cp = ord(ch)
    if ("a" <= ch <= "z") or ("A" <= ch <= "Z"):
        return ScriptTag.LATIN
    cat = unicodedata.category(ch)
    if cat == "Nd":
        return ScriptTag.DIGIT
    for tag, (lo, hi) in BLOCKS.items():
        if lo <= cp <= hi:
            return tag
    if cat.startswith("P"):
        return ScriptTag.PUNCT
    return ScriptTag.OTHER


def _majority(scripts: List[ScriptTag]) -> ScriptTag:
    # ties go to whichever tied script appeared first
    counts = Counter(scripts)
    best = max(counts.values())
    return next(s for s in scripts if counts[s] == best)


def token_script(token: str) -> ScriptTag:
    chars = [char_script(c) for c in token]
    letters = [t for t in chars if t.is_letter_script]
    if letters:
        return _majority(letters)
    if not chars:
        return ScriptTag.OTHER
    if ScriptTag.DIGIT in chars and all(t in (ScriptTag.DIGIT, ScriptTag.PUNCT) for t in chars):
        return ScriptTag.DIGIT
    if all(t is ScriptTag.PUNCT for t in chars):
        return ScriptTag.PUNCT
    return ScriptTag.OTHER


_TOKEN = re.compile(r"\S+")


def tag_tokens(text: str) -> List[TaggedToken]:
    out = []
    byte_pos = 0
    char_pos = 0
    for m in _TOKEN.finditer(text):
        start, end = m.span()
        byte_pos += len(text[char_pos:start].encode("utf-8"))
        b_start = byte_pos
        byte_pos += len(m.group().encode("utf-8"))
        char_pos = end
        out.append(TaggedToken(m.group(), token_script(m.group()), (b_start, byte_pos), (start, end)))
    return out


def dominant_script(text: str) -> ScriptTag:
    """Majority script over letter-bearing tokens; ties prefer Latin."""
    scripts = [t.tag for t in tag_tokens(text) if t.tag.is_letter_script]
    if not scripts:
        return ScriptTag.OTHER
    counts = Counter(scripts)
    best = max(counts.values())
    if counts[ScriptTag.LATIN] == best:
        return ScriptTag.LATIN
    return next(s for s in scripts if counts[s] == best)
