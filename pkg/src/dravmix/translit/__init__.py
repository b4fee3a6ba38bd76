"""Roman to Kannada/Tamil/Malayalam transliteration with top-k LM reranking."""
from __future__ import annotations

from dataclasses import replace
from typing import Iterable

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..corpus import Corpus, Provenance
from ..script import ScriptTag, tag_tokens
from .decode import (Candidate, apply_rules, best_transliteration, generate_candidates,
                     rerank, transliterate_text)
from .lm import BOUNDARY, CharLM, train_char_lm
from .rules import SCRIPT_OF, Rule, RuleTable, default_table, default_table_text

__all__ = [
    "BOUNDARY", "Candidate", "CharLM", "Rule", "RuleTable", "SCRIPT_OF", "Transliterator",
    "apply_rules", "best_transliteration", "default_table", "default_table_text",
    "generate_candidates", "native_lines", "rerank", "train_char_lm",
    "transliterate_corpus", "transliterate_text",
]


def native_lines(texts: Iterable[str], script: ScriptTag) -> list:
    """Native-script words of ``texts``, one per line, for training a reranking LM."""
    out = []
    for text in texts:
        out.extend(t.token for t in tag_tokens(text) if t.tag is script)
    return out


class Transliterator(BaseEstimator, TransformerMixin):
    """Sentence-level transliterator.

    ``fit`` trains the reranking character LM on native-script text (lines
    or words). Passing ``X=None`` skips the LM, in which case the greedy rule
    output is used for every token. ``rules`` may be a :class:`RuleTable`, a
    path to a rule file, or None for the built-in table.
    """

    def __init__(self, language="Kannada", rules=None, order=3, alpha=0.1, beam=16, k=4):
        self.language = language
        self.rules = rules
        self.order = order
        self.alpha = alpha
        self.beam = beam
        self.k = k

    def _table(self) -> RuleTable:
        if self.rules is None:
            return default_table(self.language)
        if isinstance(self.rules, RuleTable):
            return self.rules
        return RuleTable.from_file(self.rules, self.language)

    def fit(self, X=None, y=None):
        self.table_ = self._table()
        self.lm_ = None
        if X is not None:
            lines = [x for x in X if x and x.strip()]
            if lines:
                self.lm_ = train_char_lm(lines, n=self.order, alpha=self.alpha)
        return self

    def transform(self, X):
        check_is_fitted(self, "table_")
        return [transliterate_text(x, self.table_, self.lm_, k=self.k, beam=self.beam) for x in X]


def transliterate_corpus(corpus: Corpus, model: Transliterator) -> Corpus:
    texts = model.transform(corpus.texts)
    samples = [replace(s, text=t, provenance=Provenance.TRANSLITERATED)
               for s, t in zip(corpus.samples, texts)]
    return Corpus(samples, corpus.language, corpus.split)
