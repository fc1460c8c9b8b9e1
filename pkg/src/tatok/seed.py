"""Candidate piece extraction.

The seed vocabulary is the pool the trainer prunes from: the most
frequent substrings of every length up to a cap, plus every character
seen in the corpus.  Substrings never cross sentence boundaries, and a
piece may contain internal boundary markers, which is what makes
multi-word tokens possible later.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .corpus import CorpusHandle
from .errors import ConfigError

DEFAULT_MAX_PIECE_LEN = 24


@dataclass
class SeedVocab:
    """Frequency-ranked candidate pieces; the character union is always kept."""

    entries: list[tuple[str, int]]
    char_union: set[str]
    target_seed_size: int

    def __len__(self) -> int:
        return len(self.entries)


def _selection_key(item: tuple[str, int]):
    piece, freq = item
    return (-freq, len(piece), piece)


def extract_seed(
    corpus: CorpusHandle,
    max_piece_len: int = DEFAULT_MAX_PIECE_LEN,
    seed_size: int = 100_000,
) -> SeedVocab:
    """Count all substring windows and keep the `seed_size` most frequent.

    Frequency ties resolve to shorter pieces, then lexicographically, so
    extraction is reproducible.  Characters missing from the top ranks are
    appended, so the result can exceed `seed_size` by at most the
    character-union size.
    """
    if max_piece_len < 1:
        raise ConfigError(f"max_piece_len must be >= 1, got {max_piece_len}")
    if seed_size < len(corpus.charset):
        raise ConfigError(
            f"seed_size {seed_size} is below the character union size {len(corpus.charset)}"
        )
    counts: Counter[str] = Counter()
    for sent in corpus.sentences:
        text = sent.text
        n = len(text)
        for i in range(n):
            top = min(max_piece_len, n - i)
            for length in range(1, top + 1):
                counts[text[i : i + length]] += 1
    ranked = sorted(counts.items(), key=_selection_key)
    chosen = ranked[:seed_size]
    have = {p for p, _ in chosen}
    for ch in corpus.charset:
        if ch not in have:
            chosen.append((ch, counts[ch]))
    chosen.sort(key=_selection_key)
    return SeedVocab(chosen, set(corpus.charset), seed_size)


def save_tsv(seed: SeedVocab, path: str | Path) -> None:
    """Debug dump, one `piece<TAB>frequency` per line in selection order."""
    lines = [f"{p}\t{f}" for p, f in seed.entries]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
