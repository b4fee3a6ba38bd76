"""Ordered roman->native grapheme rule tables."""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional, Tuple

from ..corpus import Language
from ..errors import ParseError
from ..script import BLOCKS, ScriptTag

SCRIPT_OF = {
    Language.KANNADA: ScriptTag.KANNADA,
    Language.TAMIL: ScriptTag.TAMIL,
    Language.MALAYALAM: ScriptTag.MALAYALAM,
}


@dataclass(frozen=True)
class Rule:
    roman: str
    native: str
    group: Optional[str] = None


@dataclass(frozen=True)
class RuleTable:
    language: Language
    entries: Tuple[Rule, ...]
    _index: Dict[str, List[Rule]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        lo, hi = BLOCKS[SCRIPT_OF[self.language]]
        index: Dict[str, List[Rule]] = {}
        for rule in self.entries:
            if not rule.roman or not rule.roman.isascii() or any(c.isspace() for c in rule.roman):
                raise ValueError(f"roman grapheme must be non-empty ASCII: {rule.roman!r}")
            bad = [c for c in rule.native if not lo <= ord(c) <= hi]
            if bad:
                raise ValueError(
                    f"native grapheme {rule.native!r} for {rule.roman!r} leaves the "
                    f"{self.language.value} block (U+{ord(bad[0]):04X})")
            index.setdefault(rule.roman, []).append(rule)
        object.__setattr__(self, "_index", index)

    @property
    def max_grapheme_len(self) -> int:
        return max((len(r) for r in self._index), default=0)

    def rules_for(self, roman: str) -> List[Rule]:
        return self._index.get(roman, [])

    def matches_at(self, word: str, pos: int) -> List[Rule]:
        """All rules whose roman grapheme matches ``word`` at ``pos``, longest first."""
        out = []
        for n in range(min(self.max_grapheme_len, len(word) - pos), 0, -1):
            out.extend(self._index.get(word[pos:pos + n], ()))
        return out

    @classmethod
    def parse(cls, text: str, language) -> "RuleTable":
        language = Language.parse(language)
        entries = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise ParseError("expected roman<TAB>native[<TAB>group]", lineno)
            group = parts[2].strip() if len(parts) == 3 and parts[2].strip() else None
            entries.append(Rule(parts[0].strip(), parts[1].strip(), group))
        try:
            return cls(language, entries)
        except ValueError as exc:
            raise ParseError(str(exc)) from None

    @classmethod
    def from_file(cls, path, language) -> "RuleTable":
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read(), language)

    def dumps(self) -> str:
        return "".join(
            "\t".join([r.roman, r.native] + ([r.group] if r.group else [])) + "\n"
            for r in self.entries)


def default_table_text(language) -> str:
    language = Language.parse(language)
    return (resources.files("dravmix.translit") / "data" / f"{language.value.lower()}.tsv").read_text(
        encoding="utf-8")


_DEFAULTS: Dict[Language, RuleTable] = {}


def default_table(language) -> RuleTable:
    language = Language.parse(language)
    if language not in _DEFAULTS:
        _DEFAULTS[language] = RuleTable.parse(default_table_text(language), language)
    return _DEFAULTS[language]
