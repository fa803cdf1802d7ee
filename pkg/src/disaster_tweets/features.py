"""Vocabulary construction and tf-idf weighting of token sequences.

The idf follows ``log(n_docs / (1 + df))`` literally, so a term present in
every document gets a negative weight. ``idf="smooth"`` switches to the
non-negative ``log((1 + n_docs) / (1 + df)) + 1`` and ``idf="none"`` keeps raw
term counts.
"""
from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .preprocess import TokenizedDoc

IDF_VARIANTS = ("paper", "smooth", "none")


def _tokens(doc) -> Sequence[str]:
    return doc.tokens if isinstance(doc, TokenizedDoc) else doc


def extract_ngrams(tokens: Sequence[str], ngram_range: tuple[int, int] = (1, 1)) -> list[str]:
    """Contiguous n-grams joined by single spaces, grouped by ascending n."""
    lo, hi = ngram_range
    if lo < 1 or hi < lo:
        raise ValueError(f"invalid ngram_range {ngram_range}")
    tokens = list(tokens)
    out = []
    for n in range(lo, hi + 1):
        if n == 1:
            out.extend(tokens)
        else:
            out.extend(" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1))
    return out


def idf_value(n_docs: int, df: int | np.ndarray, variant: str = "paper"):
    if variant == "paper":
        return np.log(n_docs / (1.0 + np.asarray(df, dtype=np.float64)))
    if variant == "smooth":
        return np.log((1.0 + n_docs) / (1.0 + np.asarray(df, dtype=np.float64))) + 1.0
    if variant == "none":
        return np.ones_like(np.asarray(df, dtype=np.float64))
    raise ValueError(f"unknown idf variant {variant!r}; choose from {IDF_VARIANTS}")


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    doc_freq: np.ndarray
    n_docs: int
    ngram_range: tuple[int, int] = (1, 1)
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.terms)})
        if len(self.index) != len(self.terms):
            raise ValueError("duplicate terms in vocabulary")
        df = np.asarray(self.doc_freq)
        if len(df) != len(self.terms) or (len(df) and (df.min() < 1 or df.max() > self.n_docs)):
            raise ValueError("doc_freq must satisfy 1 <= df <= n_docs")

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    def idf(self, variant: str = "paper") -> np.ndarray:
        return idf_value(self.n_docs, self.doc_freq, variant)

    def df(self, term: str) -> int:
        return int(self.doc_freq[self.index[term]])

    def to_tsv(self) -> str:
        lo, hi = self.ngram_range
        lines = [f"# n_docs={self.n_docs}\tngram_range={lo},{hi}"]
        lines += [f"{t}\t{i}\t{int(d)}" for i, (t, d) in enumerate(zip(self.terms, self.doc_freq))]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str) -> "Vocabulary":
        lines = text.splitlines()
        head = dict(kv.split("=", 1) for kv in lines[0].lstrip("# ").split("\t"))
        lo, hi = (int(x) for x in head["ngram_range"].split(","))
        terms, dfs = [], []
        for i, line in enumerate(lines[1:]):
            term, idx, df = line.split("\t")
            if int(idx) != i:
                raise ValueError(f"vocabulary index {idx} out of order at row {i}")
            terms.append(term)
            dfs.append(int(df))
        return cls(tuple(terms), np.array(dfs, dtype=np.int64), int(head["n_docs"]), (lo, hi))

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_tsv().encode("utf-8"))

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        return cls.from_tsv(Path(path).read_text("utf-8"))

    @property
    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_tsv().encode("utf-8")).hexdigest()


def build_vocabulary(docs: Sequence, ngram_range: tuple[int, int] = (1, 1),
                     min_df: int = 1) -> Vocabulary:
    """Vocabulary of every n-gram occurring in at least ``min_df`` documents,
    indexed in lexicographic order."""
    if not docs:
        raise ValueError("cannot build a vocabulary from zero documents")
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    counts: Counter[str] = Counter()
    for doc in docs:
        counts.update(set(extract_ngrams(_tokens(doc), ngram_range)))
    terms = sorted(t for t, c in counts.items() if c >= min_df)
    if not terms:
        raise ValueError(f"empty vocabulary after min_df={min_df} filtering")
    df = np.array([counts[t] for t in terms], dtype=np.int64)
    return Vocabulary(tuple(terms), df, len(docs), tuple(ngram_range))


def term_frequency(doc, term: str, ngram_range: tuple[int, int] | None = None) -> int:
    """Raw count of ``term`` in the document; n is taken from the term itself
    unless ``ngram_range`` is given."""
    if ngram_range is None:
        n = term.count(" ") + 1
        ngram_range = (n, n)
    return extract_ngrams(_tokens(doc), ngram_range).count(term)


def inverse_document_frequency(vocab: Vocabulary, term: str, variant: str = "paper") -> float:
    if term not in vocab:
        raise KeyError(f"term {term!r} not in vocabulary")
    return float(idf_value(vocab.n_docs, vocab.df(term), variant))


@dataclass(frozen=True)
class SparseVector:
    indices: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "weights", w)
        if idx.shape != w.shape:
            raise ValueError("indices and weights differ in length")
        if len(idx) > 1 and np.any(np.diff(idx) <= 0):
            raise ValueError("indices must be strictly increasing")
        if np.any(w == 0):
            raise ValueError("zero weights must not be stored")

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.weights.tolist()))

    def __len__(self) -> int:
        return len(self.indices)

    def to_dense(self, dim: int) -> np.ndarray:
        if len(self.indices) and self.indices[-1] >= dim:
            raise ValueError(f"index {self.indices[-1]} out of range for dimension {dim}")
        out = np.zeros(dim)
        out[self.indices] = self.weights
        return out


def _weights(doc, vocab: Vocabulary, idf: np.ndarray, sublinear_tf: bool, norm: str | None):
    counts = Counter(extract_ngrams(_tokens(doc), vocab.ngram_range))
    pairs = sorted((vocab.index[t], c) for t, c in counts.items() if t in vocab.index)
    if not pairs:
        return np.empty(0, dtype=np.int64), np.empty(0)
    idx = np.array([p[0] for p in pairs], dtype=np.int64)
    tf = np.array([p[1] for p in pairs], dtype=np.float64)
    if sublinear_tf:
        tf = 1.0 + np.log(tf)
    w = tf * idf[idx]
    keep = w != 0
    idx, w = idx[keep], w[keep]
    if norm == "l2":
        nrm = math.sqrt(float(np.dot(w, w)))
        if nrm > 0:
            w = w / nrm
    elif norm is not None:
        raise ValueError(f"unknown norm {norm!r}")
    return idx, w


def vectorize(doc, vocab: Vocabulary, idf: str = "paper", sublinear_tf: bool = False,
              norm: str | None = None) -> SparseVector:
    """tf-idf vector of one document; out-of-vocabulary terms are ignored."""
    idx, w = _weights(doc, vocab, vocab.idf(idf), sublinear_tf, norm)
    return SparseVector(idx, w)


def vectorize_many(docs: Iterable, vocab: Vocabulary, idf: str = "paper",
                   sublinear_tf: bool = False, norm: str | None = None) -> sp.csr_matrix:
    idf_arr = vocab.idf(idf)
    indptr, indices, data = [0], [], []
    for doc in docs:
        idx, w = _weights(doc, vocab, idf_arr, sublinear_tf, norm)
        indices.append(idx)
        data.append(w)
        indptr.append(indptr[-1] + len(idx))
    indices = np.concatenate(indices) if indices else np.empty(0, dtype=np.int64)
    data = np.concatenate(data) if data else np.empty(0)
    return sp.csr_matrix((data, indices, np.array(indptr)), shape=(len(indptr) - 1, len(vocab)))


def vectors_to_csr(vectors: Sequence[SparseVector], dim: int) -> sp.csr_matrix:
    indptr = np.cumsum([0] + [len(v) for v in vectors])
    indices = np.concatenate([v.indices for v in vectors]) if vectors else np.empty(0, dtype=np.int64)
    data = np.concatenate([v.weights for v in vectors]) if vectors else np.empty(0)
    if len(indices) and indices.max() >= dim:
        raise ValueError("vector index exceeds feature dimension")
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))


@dataclass(frozen=True)
class TfidfConfig:
    ngram_range: tuple[int, int] = (1, 1)
    min_df: int = 1
    idf: str = "paper"
    sublinear_tf: bool = False
    norm: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "ngram_range", tuple(self.ngram_range))
        if self.idf not in IDF_VARIANTS:
            raise ValueError(f"unknown idf variant {self.idf!r}")

    def fit(self, docs: Sequence) -> Vocabulary:
        return build_vocabulary(docs, self.ngram_range, self.min_df)

    def transform(self, docs: Iterable, vocab: Vocabulary) -> sp.csr_matrix:
        return vectorize_many(docs, vocab, self.idf, self.sublinear_tf, self.norm)
