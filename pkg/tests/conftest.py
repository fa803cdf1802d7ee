import datetime as dt
import os
from pathlib import Path

import pytest

from disaster_tweets.corpus import (Dataset, Tweet, find_published_files, load_published,
                                    load_registry)

DATA_ENV = "DISASTER_TWEETS_DATA"


@pytest.fixture(scope="session")
def registry():
    return load_registry()


@pytest.fixture(scope="session")
def tornado(registry):
    return registry["tornado_2011"]


def load_published_corpora(registry):
    """All nine published corpora from $DISASTER_TWEETS_DATA, or None when it is unset."""
    root = os.environ.get(DATA_ENV)
    if not root or not Path(root).is_dir():
        return None
    files = find_published_files(root, registry)
    missing = [s.disaster_id for s in registry if s.disaster_id not in files]
    if missing:
        raise FileNotFoundError(f"{DATA_ENV}={root} lacks files for {missing}")
    return {d: load_published(p, registry[d]) for d, p in files.items()}


@pytest.fixture(scope="session")
def published_or_none(registry):
    return load_published_corpora(registry)


def require_published(corpora):
    """Fail the calling test with an explicit message when the published corpus is absent."""
    if corpora is None:
        pytest.fail(f"published corpus required: set {DATA_ENV} to the directory holding the "
                    "nine disaster files", pytrace=False)
    return corpora


def make_dataset(spec, labels, texts=None, needs=None, days=None):
    """Small labelled dataset for ``spec``; one tweet per label."""
    tweets = []
    for i, y in enumerate(labels):
        text = texts[i] if texts else f"tweet number {i} about food"
        need = needs[i] if needs else "food"
        day = days[i] if days else spec.duration_start
        ts = None if day is None else dt.datetime.combine(day, dt.time(12), tzinfo=dt.timezone.utc)
        tweets.append(Tweet(f"t{i}", text, ts, spec.disaster_id, need, y))
    return Dataset(spec, tuple(tweets))


# --- acceptance reporting ---------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


class criterion:
    """Context manager recording one acceptance criterion as a PASS/FAIL line."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.notes: list[str] = []

    def note(self, text: str) -> None:
        self.notes.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        line = f"criterion {self.number:>2} {status}: {self.title}"
        if exc is not None:
            msg = str(exc).splitlines()[0] if str(exc) else exc_type.__name__
            line += f" [{msg if len(msg) <= 160 else msg[:157] + '...'}]"
        ACCEPTANCE_LINES.append(line)
        ACCEPTANCE_LINES.extend(f"             {n}" for n in self.notes)
        print(line)
        return False


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
