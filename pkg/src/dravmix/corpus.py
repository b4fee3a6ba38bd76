"""Labelled code-mixed corpora: ingestion, preprocessing and dataset variants.

A corpus file is UTF-8 TSV with one ``text<TAB>label`` record per line and an
optional third provenance column. Sample order is ingestion order; nothing in
this module shuffles.
"""
from __future__ import annotations

import enum
import io
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import IO, Iterable, Optional, Union

from .errors import ContractError, ParseError


class Label(enum.IntEnum):
    """The five sentiment classes, in the fixed order used for tie-breaking."""

    POSITIVE = 0
    NEGATIVE = 1
    MIXED_FEELINGS = 2
    UNKNOWN_STATE = 3
    NOT_LANGUAGE = 4

    def spelling(self, language: Optional["Language"] = None) -> str:
        if self is Label.NOT_LANGUAGE:
            return f"not-{language.value}" if language is not None else "not-language"
        return _CANONICAL[self]

    @classmethod
    def parse(cls, raw: str) -> "Label":
        key = raw.strip().lower().replace(" ", "_").replace("-", "_")
        if raw.strip().lower().startswith("not-") or key.startswith("not_"):
            return cls.NOT_LANGUAGE
        try:
            return _ALIASES[key]
        except KeyError:
            raise ValueError(f"unknown label {raw!r}") from None


_CANONICAL = {
    Label.POSITIVE: "Positive",
    Label.NEGATIVE: "Negative",
    Label.MIXED_FEELINGS: "Mixed_feelings",
    Label.UNKNOWN_STATE: "unknown_state",
}

_ALIASES = {
    "positive": Label.POSITIVE,
    "negative": Label.NEGATIVE,
    "mixed_feelings": Label.MIXED_FEELINGS,
    "mixedfeelings": Label.MIXED_FEELINGS,
    "unknown_state": Label.UNKNOWN_STATE,
    "unknownstate": Label.UNKNOWN_STATE,
    "not_language": Label.NOT_LANGUAGE,
    "notlanguage": Label.NOT_LANGUAGE,
}


class Language(str, enum.Enum):
    KANNADA = "Kannada"
    TAMIL = "Tamil"
    MALAYALAM = "Malayalam"

    @classmethod
    def parse(cls, raw: Union[str, "Language"]) -> "Language":
        if isinstance(raw, Language):
            return raw
        key = raw.strip().lower()
        for lang in cls:
            if key in (lang.value.lower(), _ISO[lang]):
                return lang
        raise ValueError(f"unknown language {raw!r}")


_ISO = {Language.KANNADA: "kn", Language.TAMIL: "ta", Language.MALAYALAM: "ml"}


class Provenance(str, enum.Enum):
    ORIGINAL = "original"
    TRANSLITERATED = "transliterated"
    TRANSLATED = "translated"


class Split(str, enum.Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"


class VariantId(str, enum.Enum):
    TRA = "TRA"
    TRAI = "TRAI"
    TRAA = "TRAA"
    MERGED = "MERGED"

    @property
    def title(self) -> str:
        return _VARIANT_TITLES[self]


_VARIANT_TITLES = {
    VariantId.TRA: "Train (TRA)",
    VariantId.TRAI: "Transliterate + TRA (TRAI)",
    VariantId.TRAA: "Translate + TRA (TRAA)",
    VariantId.MERGED: "Merged (TRA+TRAI+TRAA)",
}


@dataclass(frozen=True)
class Sample:
    id: int
    text: str
    label: Label
    language: Language
    provenance: Provenance = Provenance.ORIGINAL


@dataclass(frozen=True)
class Corpus:
    samples: tuple
    language: Language
    split: Split = Split.TRAIN

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        for s in self.samples:
            if s.language is not self.language:
                raise ContractError(
                    f"sample {s.id} is {s.language.value}, corpus is {self.language.value}")

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def texts(self):
        return [s.text for s in self.samples]

    @property
    def labels(self):
        return [s.label for s in self.samples]


@dataclass(frozen=True)
class CorpusStats:
    total: int
    per_class: dict = field(default_factory=dict)

    def share(self, label: Label) -> float:
        return self.per_class[label] / self.total if self.total else 0.0


def load_tsv(stream: Union[IO[bytes], IO[str], Iterable[str]], language,
             split: Split = Split.TRAIN, header: bool = False) -> Corpus:
    """Parse a ``text<TAB>label[<TAB>provenance]`` stream into a :class:`Corpus`.

    Blank lines are skipped. Raises :class:`ParseError` naming the 1-based
    line number for a missing tab, an unknown label, or an empty text field.
    """
    language = Language.parse(language)
    samples = []
    for lineno, line in enumerate(stream, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        line = line.rstrip("\n").rstrip("\r")
        if header and lineno == 1:
            continue
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ParseError("expected text<TAB>label, found no tab", lineno)
        if len(parts) > 3:
            raise ParseError(f"expected at most 3 columns, found {len(parts)}", lineno)
        text = parts[0].strip()
        if not text:
            raise ParseError("empty text field", lineno)
        try:
            label = Label.parse(parts[1])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        provenance = Provenance.ORIGINAL
        if len(parts) == 3 and parts[2].strip():
            try:
                provenance = Provenance(parts[2].strip().lower())
            except ValueError:
                raise ParseError(f"unknown provenance {parts[2]!r}", lineno) from None
        samples.append(Sample(len(samples), text, label, language, provenance))
    return Corpus(samples, language, split)


def read_tsv(path, language, split: Split = Split.TRAIN, header: bool = False) -> Corpus:
    with open(path, encoding="utf-8", newline="") as fh:
        return load_tsv(fh, language, split=split, header=header)


def dump_tsv(corpus: Corpus, stream: IO[str], provenance: bool = True) -> None:
    for s in corpus.samples:
        row = [s.text.replace("\t", " ").replace("\n", " "), s.label.spelling(s.language)]
        if provenance:
            row.append(s.provenance.value)
        stream.write("\t".join(row) + "\n")


def dumps_tsv(corpus: Corpus, provenance: bool = True) -> str:
    buf = io.StringIO()
    dump_tsv(corpus, buf, provenance=provenance)
    return buf.getvalue()


def write_tsv(corpus: Corpus, path, provenance: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        dump_tsv(corpus, fh, provenance=provenance)


_BRACKETED = re.compile(r"\[[^\[\]]*\]|\([^()]*\)")
_LANG_TAG = re.compile(
    r"^[#@](kannada|tamil|malayalam|english|kan|tam|mal|eng|kn|ta|ml|en)[:.!]*$",
    re.IGNORECASE)


def clean_text(text: str) -> str:
    """Strip bracketed spans (innermost first) and trailing language tags.

    A language tag is a trailing ``#tamil`` / ``@kn`` style token. Bare
    language names are left alone since they are often part of the comment.
    """
    prev = None
    while prev != text:
        prev = text
        text = _BRACKETED.sub(" ", text)
    tokens = text.split()
    while tokens and _LANG_TAG.match(tokens[-1]):
        tokens.pop()
    return " ".join(tokens)


def preprocess_for_translit(corpus: Corpus) -> Corpus:
    """Drop NotLanguage samples and clean the text of the remainder.

    Samples whose text is empty after cleaning are dropped too. Ids are kept so
    downstream errors can point back at the source row.
    """
    kept = []
    for s in corpus.samples:
        if s.label is Label.NOT_LANGUAGE:
            continue
        text = clean_text(s.text)
        if text:
            kept.append(replace(s, text=text))
    return Corpus(kept, corpus.language, corpus.split)


def _check_provenance(part: Corpus, expected: Provenance, name: str) -> None:
    if part is None:
        raise ContractError(f"{name} corpus is required for this variant")
    bad = [s.id for s in part.samples if s.provenance is not expected]
    if bad:
        raise ContractError(
            f"{name} corpus must have provenance {expected.value}; "
            f"{len(bad)} samples differ (first id {bad[0]})")


def build_variant(variant, base: Corpus, translit: Optional[Corpus] = None,
                  translated: Optional[Corpus] = None) -> Corpus:
    variant = VariantId(variant)
    if variant is VariantId.TRA:
        return base
    parts = [base.samples]
    if variant in (VariantId.TRAI, VariantId.MERGED):
        _check_provenance(translit, Provenance.TRANSLITERATED, "transliterated")
        parts.append(translit.samples)
    if variant in (VariantId.TRAA, VariantId.MERGED):
        _check_provenance(translated, Provenance.TRANSLATED, "translated")
        parts.append(translated.samples)
    samples = [replace(s, id=i) for i, s in enumerate(s for part in parts for s in part)]
    return Corpus(samples, base.language, base.split)


def corpus_stats(corpus: Corpus) -> CorpusStats:
    counts = Counter(s.label for s in corpus.samples)
    return CorpusStats(len(corpus.samples), {label: counts.get(label, 0) for label in Label})
