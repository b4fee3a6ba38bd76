"""Rule transduction, top-k candidate generation and LM reranking."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from ..errors import ContractError
from ..script import ScriptTag, tag_tokens
from .lm import CharLM
from .rules import Rule, RuleTable


@dataclass(frozen=True)
class Candidate:
    text: str
    score: float = 0.0


def apply_rules(word: str, table: RuleTable) -> str:
    """Greedy longest-match transduction; unmatched characters pass through."""
    out = []
    pos = 0
    while pos < len(word):
        matches = table.matches_at(word, pos)
        if matches:
            out.append(matches[0].native)
            pos += len(matches[0].roman)
        else:
            out.append(word[pos])
            pos += 1
    return "".join(out)


def _options(word: str, pos: int, table: RuleTable) -> List[Rule]:
    """Choices at ``pos``: the greedy rule first, then rules sharing its group."""
    matches = table.matches_at(word, pos)
    if not matches:
        return []
    best = matches[0]
    if best.group is None:
        return [best]
    opts = [best]
    seen = {(best.roman, best.native)}
    for rule in matches[1:]:
        if rule.group == best.group and (rule.roman, rule.native) not in seen:
            seen.add((rule.roman, rule.native))
            opts.append(rule)
    return opts


def generate_candidates(word: str, table: RuleTable, beam: int = 16, k: int = 4) -> List[Candidate]:
    """Expand every ambiguity point, keeping at most ``beam`` partial hypotheses.

    Hypotheses are ranked by how many non-default choices they made (stable
    in expansion order), so the greedy :func:`apply_rules` output is always
    first. Scores are 0 until :func:`rerank` assigns them.
    """
    if k < 1:
        raise ContractError("k must be >= 1")
    if beam < k:
        raise ContractError(f"beam ({beam}) must be >= k ({k})")
    # (deviations, pos, pieces)
    hyps = [(0, 0, ())]
    while any(pos < len(word) for _, pos, _ in hyps):
        expanded = []
        for dev, pos, pieces in hyps:
            if pos >= len(word):
                expanded.append((dev, pos, pieces))
                continue
            opts = _options(word, pos, table)
            if not opts:
                expanded.append((dev, pos + 1, pieces + (word[pos],)))
                continue
            for i, rule in enumerate(opts):
                expanded.append((dev + (i > 0), pos + len(rule.roman), pieces + (rule.native,)))
        expanded.sort(key=lambda h: h[0])
        hyps = expanded[:beam]
    out, seen = [], set()
    for _, _, pieces in hyps:
        text = "".join(pieces)
        if text not in seen:
            seen.add(text)
            out.append(Candidate(text))
    return out[:k]


def rerank(candidates: List[Candidate], lm: CharLM, k: Optional[int] = None) -> List[Candidate]:
    """Score by mean per-symbol log-probability, sort descending (stable), truncate to k."""
    if not candidates:
        raise ContractError("rerank needs at least one candidate")
    scored = [Candidate(c.text, lm.score(c.text)) for c in candidates]
    scored.sort(key=lambda c: -c.score)
    return scored if k is None else scored[:k]


def best_transliteration(word: str, table: RuleTable, lm: Optional[CharLM] = None,
                         k: int = 4, beam: int = 16) -> str:
    if lm is None:
        return apply_rules(word, table)
    return rerank(generate_candidates(word, table, beam=beam, k=k), lm, k)[0].text


def _ascii_lower(token: str) -> str:
    return "".join(c.lower() if c.isascii() else c for c in token)


def transliterate_text(text: str, table: RuleTable, lm: Optional[CharLM] = None,
                       k: int = 4, beam: int = 16) -> str:
    """Replace Latin-script tokens by their best native candidate.

    Everything else (native tokens, digits, whitespace runs) is copied through
    unchanged. Without an LM the greedy rule output is used.
    """
    out = []
    last = 0
    for tok in tag_tokens(text):
        start, end = tok.char_range
        out.append(text[last:start])
        if tok.tag is ScriptTag.LATIN:
            out.append(best_transliteration(_ascii_lower(tok.token), table, lm, k=k, beam=beam))
        else:
            out.append(tok.token)
        last = end
    out.append(text[last:])
    return "".join(out)
