"""Corpus loading and boundary-marker normalization.

Sentences are stored with every whitespace run replaced by a single
marker character that prefixes the following piece, and one marker
prepended at the start, so a word at sentence start and the same word
after a space share vocabulary entries.  Normalized text therefore
contains no raw spaces, and multi-word tokens are ordinary substrings.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import EncodingError, MarkerCollision

DEFAULT_MARKER = "▁"

CHARACTER = "character"
WHITESPACE_WORD = "whitespace_word"
LENGTH_UNIT_MODES = (CHARACTER, WHITESPACE_WORD)

_WS_RUN = re.compile(r"\s+")


@dataclass(frozen=True)
class NormalizedSentence:
    """One marker-normalized sentence plus its raw-text length."""

    text: str
    original_length_units: int


@dataclass
class CorpusHandle:
    """An ordered, normalized sentence stream with its character inventory.

    Read-only after construction; safe to share across readers.
    """

    sentences: list[NormalizedSentence]
    charset: frozenset[str]
    length_unit_mode: str
    marker: str = DEFAULT_MARKER

    def __len__(self) -> int:
        return len(self.sentences)


def collapse_whitespace(raw: str) -> str:
    """Trim the ends and squeeze internal whitespace runs to single spaces."""
    return _WS_RUN.sub(" ", raw.strip())


def normalize_text(raw: str, marker: str = DEFAULT_MARKER) -> str:
    """Normalize one raw sentence to marker form.

    Applies NFC, collapses whitespace runs (tabs and newlines count as
    spaces), substitutes the marker, and prefixes one marker.  Returns ""
    for whitespace-only input.  Raises MarkerCollision if the marker
    already occurs in `raw`.
    """
    if marker in raw:
        raise MarkerCollision(f"input contains the boundary marker {marker!r}")
    collapsed = collapse_whitespace(unicodedata.normalize("NFC", raw))
    if not collapsed:
        return ""
    return marker + collapsed.replace(" ", marker)


def denormalize(tokens: Iterable[str], marker: str = DEFAULT_MARKER) -> str:
    """Invert normalization: markers become spaces, the leading one is dropped."""
    text = "".join(tokens).replace(marker, " ")
    return text[1:] if text.startswith(" ") else text


def length_units(raw: str, mode: str) -> int:
    """Length of a whitespace-collapsed string in the requested unit."""
    collapsed = collapse_whitespace(raw)
    if mode == CHARACTER:
        return len(collapsed)
    if mode == WHITESPACE_WORD:
        return len(collapsed.split())
    raise ValueError(f"unknown length unit mode {mode!r}")


def ingest_lines(
    lines: Iterable[str],
    mode: str = WHITESPACE_WORD,
    marker: str = DEFAULT_MARKER,
) -> CorpusHandle:
    """Build a CorpusHandle from already-decoded sentence strings.

    Empty (or whitespace-only) lines are skipped.  Deterministic: the same
    input sequence always yields the same handle.
    """
    if mode not in LENGTH_UNIT_MODES:
        raise ValueError(f"unknown length unit mode {mode!r}")
    sentences: list[NormalizedSentence] = []
    charset: set[str] = set()
    for raw in lines:
        text = normalize_text(raw, marker)
        if not text:
            continue
        sentences.append(NormalizedSentence(text, length_units(raw, mode)))
        charset.update(text)
    return CorpusHandle(sentences, frozenset(charset), mode, marker)


def ingest(
    path: str | Path,
    mode: str = WHITESPACE_WORD,
    marker: str = DEFAULT_MARKER,
) -> CorpusHandle:
    """Load a one-sentence-per-line UTF-8 text file."""
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"{path}: {exc}") from exc
    return ingest_lines(text.splitlines(), mode, marker)
