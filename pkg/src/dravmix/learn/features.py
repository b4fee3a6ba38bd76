"""Hashed character n-gram (and word unigram) count features."""
from __future__ import annotations

import zlib
from collections import Counter
from dataclasses import dataclass, asdict
from typing import Iterable, Tuple

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin

from ..errors import ContractError

PAD_LEFT, PAD_RIGHT = "<", ">"


@dataclass(frozen=True)
class FeatureSpace:
    ngram_range: Tuple[int, int] = (1, 4)
    word_unigrams: bool = True
    n_features: int = 2 ** 14
    lowercase: bool = True
    max_tokens: int = 128

    def __post_init__(self):
        lo, hi = self.ngram_range
        object.__setattr__(self, "ngram_range", (int(lo), int(hi)))
        if not 1 <= lo <= hi <= 6:
            raise ContractError(f"ngram_range must satisfy 1 <= lo <= hi <= 6, got {self.ngram_range}")
        d = self.n_features
        if d < 2 ** 10 or d & (d - 1):
            raise ContractError(f"n_features must be a power of two >= 1024, got {d}")
        if self.max_tokens is not None and self.max_tokens < 1:
            raise ContractError("max_tokens must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ngram_range"] = list(self.ngram_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSpace":
        return cls(**{**d, "ngram_range": tuple(d.get("ngram_range", (1, 4)))})


@dataclass(frozen=True)
class SparseVec:
    indices: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.indices)

    def __eq__(self, other):
        return (isinstance(other, SparseVec) and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values, other.values))

    def to_dict(self) -> dict:
        return dict(zip(self.indices.tolist(), self.values.tolist()))


def ngram_counts(text: str, space: FeatureSpace) -> Counter:
    """Feature names before hashing: ``c:<gram>`` for char n-grams, ``w:<word>`` for words.

    Each word is padded as ``<word>``; n-grams made only of padding are skipped.
    """
    if space.lowercase:
        text = text.lower()
    words = text.split()
    if space.max_tokens is not None:
        words = words[:space.max_tokens]
    lo, hi = space.ngram_range
    out = Counter()
    for w in words:
        padded = PAD_LEFT + w + PAD_RIGHT
        for n in range(lo, hi + 1):
            for i in range(len(padded) - n + 1):
                gram = padded[i:i + n]
                if gram.strip(PAD_LEFT + PAD_RIGHT):
                    out["c:" + gram] += 1
        if space.word_unigrams:
            out["w:" + w] += 1
    return out


def feature_index(name: str, n_features: int) -> int:
    return zlib.crc32(name.encode("utf-8")) & (n_features - 1)


def featurize(text: str, space: FeatureSpace) -> SparseVec:
    acc = Counter()
    for name, count in ngram_counts(text, space).items():
        acc[feature_index(name, space.n_features)] += count
    idx = np.array(sorted(acc), dtype=np.int64)
    vals = np.array([float(acc[i]) for i in idx], dtype=np.float64)
    return SparseVec(idx, vals)


def featurize_many(texts: Iterable[str], space: FeatureSpace) -> sp.csr_matrix:
    indptr, indices, data = [0], [], []
    for text in texts:
        v = featurize(text, space)
        indices.extend(v.indices.tolist())
        data.extend(v.values.tolist())
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.array(data, dtype=np.float64), np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(len(indptr) - 1, space.n_features))


class HashedNgramVectorizer(BaseEstimator, TransformerMixin):
    """Stateless sklearn transformer over :func:`featurize`."""

    def __init__(self, ngram_range=(1, 4), word_unigrams=True, n_features=2 ** 14,
                 lowercase=True, max_tokens=128):
        self.ngram_range = ngram_range
        self.word_unigrams = word_unigrams
        self.n_features = n_features
        self.lowercase = lowercase
        self.max_tokens = max_tokens

    @classmethod
    def from_space(cls, space: FeatureSpace) -> "HashedNgramVectorizer":
        return cls(**{**space.to_dict(), "ngram_range": space.ngram_range})

    @property
    def space(self) -> FeatureSpace:
        return FeatureSpace(tuple(self.ngram_range), self.word_unigrams, self.n_features,
                            self.lowercase, self.max_tokens)

    def fit(self, X=None, y=None):
        self.space_ = self.space
        return self

    def transform(self, X):
        return featurize_many(X, self.space)
