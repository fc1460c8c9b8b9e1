from __future__ import annotations

import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tatok import ScoredVocab, ingest_lines


@pytest.fixture
def ab_vocab() -> ScoredVocab:
    """The two-path reference instance: p(a)=.5, p(b)=.3, p(ab)=.2."""
    return ScoredVocab([("a", math.log(0.5)), ("b", math.log(0.3)), ("ab", math.log(0.2))])


@pytest.fixture
def ab_scores() -> dict[str, float]:
    return {"a": math.log(0.5), "b": math.log(0.3), "ab": math.log(0.2)}


@pytest.fixture
def tiny_corpus():
    return ingest_lines(["a sense of purpose in life", "a sense of calm", "purpose in life"])


@pytest.fixture
def corpus_file(tmp_path: Path) -> Path:
    path = tmp_path / "corpus.txt"
    path.write_text(
        "a sense of purpose in life\n\nthe quiet  morning\npurpose in life\n",
        encoding="utf-8",
    )
    return path
