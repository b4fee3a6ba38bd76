"""Add-alpha smoothed character n-gram language model used for reranking."""
from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable

#: Pads the start of each line (n-1 times) and terminates it (once).
BOUNDARY = "\x00"


@dataclass(frozen=True)
class CharLM:
    order: int
    alpha: float
    counts: Dict[str, Dict[str, int]]
    alphabet: FrozenSet[str]
    _totals: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        object.__setattr__(self, "_totals", {ctx: sum(c.values()) for ctx, c in self.counts.items()})

    def context(self, history: str) -> str:
        if self.order == 1:
            return ""
        padded = BOUNDARY * (self.order - 1) + history
        return padded[-(self.order - 1):]

    def prob(self, ch: str, ctx: str) -> float:
        """P(ch | ctx) where ctx is already the (order-1)-symbol context."""
        count = self.counts.get(ctx, {}).get(ch, 0)
        total = self._totals.get(ctx, 0)
        return (count + self.alpha) / (total + self.alpha * len(self.alphabet))

    def logprob(self, ch: str, ctx: str) -> float:
        return math.log(self.prob(ch, ctx))

    def events(self, text: str):
        """(context, symbol) pairs scored for ``text``, ending with the boundary."""
        padded = BOUNDARY * (self.order - 1) + text + BOUNDARY
        k = self.order - 1
        for i in range(k, len(padded)):
            yield padded[i - k:i], padded[i]

    def score(self, text: str) -> float:
        """Mean natural-log probability per predicted symbol (chars + end boundary)."""
        logs = [self.logprob(ch, ctx) for ctx, ch in self.events(text)]
        return sum(logs) / len(logs)

    def to_dict(self) -> dict:
        return {
            "format": "dravmix-charlm",
            "version": 1,
            "order": self.order,
            "alpha": self.alpha,
            "alphabet": sorted(self.alphabet),
            "counts": {ctx: dict(sorted(c.items())) for ctx, c in sorted(self.counts.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CharLM":
        if d.get("format") != "dravmix-charlm":
            raise ValueError("not a serialized character LM")
        return cls(d["order"], d["alpha"], {k: dict(v) for k, v in d["counts"].items()},
                   frozenset(d["alphabet"]))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, sort_keys=True)

    @classmethod
    def load(cls, path) -> "CharLM":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def train_char_lm(lines: Iterable[str], n: int = 3, alpha: float = 0.1) -> CharLM:
    if n < 1:
        raise ValueError("n must be >= 1")
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    counts: Dict[str, Counter] = defaultdict(Counter)
    alphabet = {BOUNDARY}
    seen = 0
    for line in lines:
        line = line.rstrip("\n").replace(BOUNDARY, "")
        if not line:
            continue
        seen += 1
        alphabet.update(line)
        padded = BOUNDARY * (n - 1) + line + BOUNDARY
        for i in range(n - 1, len(padded)):
            counts[padded[i - n + 1:i]][padded[i]] += 1
    if not seen:
        raise ValueError("cannot train a character LM on an empty corpus")
    return CharLM(n, alpha, {ctx: dict(c) for ctx, c in counts.items()}, frozenset(alphabet))
