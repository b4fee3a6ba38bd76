"""Translation stage behind a process boundary, with a persistent cache.

External translators speak a line protocol: UTF-8 sentences one per line on
stdin until EOF, exactly one translation per line on stdout, exit status 0.
"""
from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import re
import shlex
import subprocess
import threading
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .corpus import Corpus, Provenance, Sample
from .errors import ConfigurationError, ContractError, ProtocolError, TranslationError

log = logging.getLogger(__name__)


class TranslatorKind(str, enum.Enum):
    EXTERNAL = "external"
    DICTIONARY = "dictionary"
    IDENTITY = "identity"


def load_dictionary(path) -> Dict[str, str]:
    """Read a ``source<TAB>target`` TSV. Later entries override earlier ones."""
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read dictionary {path}: {exc}") from None
    out = {}
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ConfigurationError(f"{path}:{lineno}: expected source<TAB>target")
            out[parts[0]] = parts[1]
    return out


@dataclass(frozen=True)
class TranslatorSpec:
    kind: TranslatorKind
    command: Tuple[str, ...] = ()
    dictionary_path: Optional[str] = None
    timeout: Optional[float] = None
    id: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", TranslatorKind(self.kind))
        object.__setattr__(self, "command", tuple(self.command or ()))
        config = {"kind": self.kind.value}
        if self.kind is TranslatorKind.EXTERNAL:
            if not self.command:
                raise ConfigurationError("external translator needs a non-empty command")
            config["command"] = list(self.command)
        elif self.kind is TranslatorKind.DICTIONARY:
            if not self.dictionary_path:
                raise ConfigurationError("dictionary translator needs dictionary_path")
            # hash contents so editing the dictionary invalidates cached output
            config["dictionary"] = sorted(load_dictionary(self.dictionary_path).items())
        blob = json.dumps(config, ensure_ascii=False, sort_keys=True).encode("utf-8")
        object.__setattr__(self, "id", hashlib.sha256(blob).hexdigest()[:16])

    @classmethod
    def identity(cls) -> "TranslatorSpec":
        return cls(TranslatorKind.IDENTITY)

    @classmethod
    def external(cls, command: Sequence[str], timeout=None) -> "TranslatorSpec":
        return cls(TranslatorKind.EXTERNAL, command=tuple(command), timeout=timeout)

    @classmethod
    def dictionary(cls, path) -> "TranslatorSpec":
        return cls(TranslatorKind.DICTIONARY, dictionary_path=str(path))

    @classmethod
    def from_config(cls, d: dict) -> "TranslatorSpec":
        kind = TranslatorKind(d.get("kind", "identity"))
        command = d.get("command") or ()
        if isinstance(command, str):
            command = shlex.split(command)
        return cls(kind, command=tuple(command), dictionary_path=d.get("dictionary"),
                   timeout=d.get("timeout"))


def source_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {v: k for k, v in _ESCAPES.items()}


def _escape(s: str) -> str:
    return "".join(_ESCAPES.get(c, c) for c in s)


def _unescape(s: str) -> str:
    return re.sub(r"\\[\\tnr]", lambda m: _UNESCAPES[m.group()], s)


class TranslationCache:
    """Append-only ``translator_id<TAB>source_hash<TAB>translation`` file.

    With ``path=None`` the cache lives only in memory.
    """

    def __init__(self, path=None):
        self.path = None if path is None else os.fspath(path)
        self._entries: Dict[Tuple[str, str], str] = {}
        self._lock = threading.Lock()
        if self.path and os.path.exists(self.path):
            with open(self.path, encoding="utf-8", newline="\n") as fh:
                for line in fh:
                    parts = line.rstrip("\n").split("\t")
                    if len(parts) == 3:
                        self._entries[(parts[0], parts[1])] = _unescape(parts[2])

    def __len__(self):
        return len(self._entries)

    def get(self, translator_id: str, src_hash: str) -> Optional[str]:
        with self._lock:
            return self._entries.get((translator_id, src_hash))

    def put_many(self, translator_id: str, items: List[Tuple[str, str]]) -> None:
        with self._lock:
            new = [(h, t) for h, t in items if (translator_id, h) not in self._entries]
            for h, t in new:
                self._entries[(translator_id, h)] = t
            if self.path and new:
                with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
                    for h, t in new:
                        fh.write(f"{translator_id}\t{h}\t{_escape(t)}\n")


def dictionary_translate(text: str, dictionary: Dict[str, str]) -> str:
    return "".join(
        piece if not piece or piece.isspace() else dictionary.get(piece, piece)
        for piece in re.split(r"(\s+)", text))


def _sanitize(text: str) -> str:
    return text.replace("\r\n", " ").replace("\n", " ").replace("\r", " ")


def run_external(command: Sequence[str], sentences: List[str], timeout=None) -> List[str]:
    """Send ``sentences`` through one child process and return its output lines."""
    payload = "".join(s + "\n" for s in sentences).encode("utf-8")
    try:
        proc = subprocess.run(list(command), input=payload, capture_output=True, timeout=timeout)
    except FileNotFoundError as exc:
        raise TranslationError(f"translator command not found: {command[0]}") from exc
    except subprocess.TimeoutExpired as exc:
        raise TranslationError(f"translator timed out after {timeout}s",
                               stderr=(exc.stderr or b"").decode("utf-8", "replace")) from exc
    stderr = proc.stderr.decode("utf-8", "replace")
    if proc.returncode != 0:
        how = (f"killed by signal {-proc.returncode}" if proc.returncode < 0
               else f"exited with status {proc.returncode}")
        raise TranslationError(f"translator {how}: {stderr.strip()[-500:]}",
                               returncode=proc.returncode, stderr=stderr)
    try:
        out = proc.stdout.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TranslationError(f"translator output is not UTF-8: {exc}", stderr=stderr) from None
    lines = out.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [line[:-1] if line.endswith("\r") else line for line in lines]
    if len(lines) != len(sentences):
        raise ProtocolError(
            f"translator returned {len(lines)} lines for {len(sentences)} inputs",
            returncode=proc.returncode, stderr=stderr)
    return lines


_LOCKS: Dict[str, threading.Lock] = {}
_LOCKS_GUARD = threading.Lock()


def _spec_lock(spec_id: str) -> threading.Lock:
    # one child process at a time per translator configuration
    with _LOCKS_GUARD:
        return _LOCKS.setdefault(spec_id, threading.Lock())


def translate_batch(samples: Sequence[Sample], spec: TranslatorSpec,
                    cache: Optional[TranslationCache] = None,
                    chunk_size: Optional[int] = None) -> List[Sample]:
    """Translate sample texts in order; output samples carry provenance Translated.

    Cached translations are reused; the rest go to the translator in one
    child process per chunk (a single chunk by default).
    """
    for s in samples:
        if s.provenance not in (Provenance.ORIGINAL, Provenance.TRANSLITERATED):
            raise ContractError(f"sample {s.id} has provenance {s.provenance.value}")
    cache = cache if cache is not None else TranslationCache()
    sources = [_sanitize(s.text) for s in samples]
    hashes = [source_hash(t) for t in sources]

    pending: Dict[str, str] = {}
    for h, t in zip(hashes, sources):
        if h not in pending and cache.get(spec.id, h) is None:
            pending[h] = t

    if pending:
        todo = list(pending.items())
        if spec.kind is TranslatorKind.IDENTITY:
            results = [t for _, t in todo]
        elif spec.kind is TranslatorKind.DICTIONARY:
            dictionary = load_dictionary(spec.dictionary_path)
            results = [dictionary_translate(t, dictionary) for _, t in todo]
        else:
            step = chunk_size or len(todo)
            results = []
            with _spec_lock(spec.id):
                for i in range(0, len(todo), step):
                    chunk = [t for _, t in todo[i:i + step]]
                    log.info("translating %d sentences with %s", len(chunk), spec.command[0])
                    results.extend(run_external(spec.command, chunk, timeout=spec.timeout))
        cache.put_many(spec.id, [(h, r) for (h, _), r in zip(todo, results)])

    out = []
    for s, h, src in zip(samples, hashes, sources):
        text = cache.get(spec.id, h)
        if not text.strip():
            # an empty line cannot round-trip through corpus TSV
            log.warning("empty translation for sample %s; keeping source text", s.id)
            text = src
        out.append(replace(s, text=text, provenance=Provenance.TRANSLATED))
    return out


def translate_corpus(corpus: Corpus, spec: TranslatorSpec,
                     cache: Optional[TranslationCache] = None) -> Corpus:
    return Corpus(translate_batch(corpus.samples, spec, cache), corpus.language, corpus.split)
