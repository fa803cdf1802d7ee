"""Tweet text normalization: cleaning, tokenizing, stop-word removal, stemming."""
from __future__ import annotations

import html
import re
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

from .stemmer import stem

__all__ = ["StopList", "TokenizedDoc", "clean", "tokenize", "remove_stopwords", "stem",
           "preprocess_pipeline", "preprocess_text", "default_stoplist"]

_TAG = re.compile(r"<[^>]*>")
_URL = re.compile(r"(?:https?://|www\.)\S*", re.I)
_RT_MARKER = re.compile(r"^\s*RT\b:?")
_MENTION = re.compile(r"@[A-Za-z0-9_]+")
_NON_ALNUM = re.compile(r"[^a-z0-9\s]+")
_DIGITS = re.compile(r"(?<!\S)\d+(?!\S)")
_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class StopList:
    words: frozenset[str]

    def __contains__(self, word: str) -> bool:
        return word in self.words

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "StopList":
        words = set()
        for line in lines:
            line = line.split("#", 1)[0].strip().lower()
            if line:
                words.add(line)
        return cls(frozenset(words))

    @classmethod
    def from_file(cls, path: str | Path) -> "StopList":
        return cls.from_lines(Path(path).read_text("utf-8").splitlines())


_DEFAULT: StopList | None = None


def default_stoplist() -> StopList:
    global _DEFAULT
    if _DEFAULT is None:
        text = resources.files("disaster_tweets.data").joinpath("stopwords.txt").read_text("utf-8")
        _DEFAULT = StopList.from_lines(text.splitlines())
    return _DEFAULT


@dataclass(frozen=True)
class TokenizedDoc:
    tokens: tuple[str, ...]
    source_id: str = ""

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def empty(self) -> bool:
        return not self.tokens


def _fold_ascii(text: str) -> str:
    decomposed = unicodedata.normalize("NFKD", text)
    return decomposed.encode("ascii", "ignore").decode("ascii")


def clean(raw: str) -> str:
    """Strip markup, links, mentions and the leading retweet marker, then
    lowercase and replace punctuation by spaces.

    Accented letters are folded to ASCII and other non-ASCII characters
    dropped; ``#tag`` keeps ``tag``; pure-digit tokens are removed.
    """
    text = html.unescape(raw)
    text = _TAG.sub(" ", text)
    text = _URL.sub(" ", text)
    text = _RT_MARKER.sub(" ", text)
    text = _MENTION.sub(" ", text)
    text = _fold_ascii(text).lower()
    text = _NON_ALNUM.sub(" ", text)
    text = _DIGITS.sub(" ", text)
    return _WS.sub(" ", text).strip()


def tokenize(cleaned: str) -> list[str]:
    return cleaned.split()


def remove_stopwords(tokens: Iterable[str], stop: StopList | None = None) -> list[str]:
    stop = default_stoplist() if stop is None else stop
    return [t for t in tokens if t not in stop]


def preprocess_text(text: str, stop: StopList | None = None, stemming: bool = True) -> tuple[str, ...]:
    stop = default_stoplist() if stop is None else stop
    tokens = remove_stopwords(tokenize(clean(text)), stop)
    if stemming:
        # a stem can itself be a stop-word ("wills" -> "will"); filter again
        tokens = [s for s in map(stem, tokens) if s not in stop]
    return tuple(tokens)


def preprocess_pipeline(tweet, stop: StopList | None = None, stemming: bool = True) -> TokenizedDoc:
    """Clean, tokenize, drop stop-words and stem one tweet (or raw string)."""
    if isinstance(tweet, str):
        return TokenizedDoc(preprocess_text(tweet, stop, stemming))
    return TokenizedDoc(preprocess_text(tweet.text, stop, stemming), tweet.id)
