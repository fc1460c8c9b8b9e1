"""Synthetic phrase-repetition corpora.

Deterministic generators used by the benchmark suite and the demos: a
supportive-writing word and phrase bank with heavy phrase reuse (so that
multi-word tokens pay off), plus a score-less "pre-trained style" token
list to merge against.  Everything is driven by the toolkit's own
counter-based generator, so a seed pins the corpus bytes on any platform.
"""

from __future__ import annotations

from pathlib import Path

from .rng import StreamRng

WORDS = (
    "a", "about", "after", "again", "also", "and", "any", "are", "ask", "at",
    "be", "been", "better", "body", "breathe", "but", "calm", "can", "care",
    "change", "could", "day", "deep", "do", "down", "each", "easy", "enough",
    "feel", "find", "for", "friend", "from", "gentle", "give", "go", "good",
    "grow", "habit", "hard", "have", "healthy", "hear", "help", "hold", "hope",
    "how", "if", "in", "is", "it", "keep", "kind", "know", "learn", "let",
    "life", "light", "listen", "little", "make", "may", "mind", "moment",
    "more", "most", "need", "new", "not", "notice", "now", "of", "often",
    "okay", "on", "one", "or", "our", "out", "own", "pace", "patient", "pause",
    "peace", "plan", "practice", "quiet", "rest", "safe", "say", "see", "self",
    "share", "sleep", "slow", "small", "so", "some", "start", "stay", "step",
    "still", "strong", "support", "take", "talk", "thank", "that", "the",
    "them", "then", "there", "they", "things", "think", "this", "time", "to",
    "today", "trust", "try", "walk", "warm", "water", "way", "we", "well",
    "what", "when", "will", "with", "worry", "you", "your",
)

PHRASES = (
    "one step at a time",
    "be kind to yourself",
    "take a deep breath",
    "a regular sleep routine",
    "talk to someone you trust",
    "it is okay to rest",
    "small habits add up",
    "notice how you feel",
    "give yourself credit",
    "ask for help early",
    "set a gentle pace",
    "make time for quiet",
    "keep a simple plan",
    "let the day be slow",
    "stay with the moment",
    "write down your worries",
    "a short walk helps",
    "drink enough water",
    "celebrate small wins",
    "rest is part of progress",
    "you are not alone",
    "change takes practice",
    "listen to your body",
    "hold on to hope",
    "start where you are",
)


def generate_corpus(n_sentences: int = 300, seed: int = 7, phrase_weight: float = 0.6) -> list[str]:
    """Raw sentences mixing bank phrases with filler words."""
    rng = StreamRng.from_seed(seed)
    sentences = []
    for _ in range(n_sentences):
        units = []
        for _ in range(2 + rng.next_below(5)):
            if rng.next_float() < phrase_weight:
                units.append(rng.choice(PHRASES))
            else:
                units.append(" ".join(rng.choice(WORDS) for _ in range(1 + rng.next_below(3))))
        sentences.append(" ".join(units))
    return sentences


def write_corpus(path: str | Path, sentences: list[str]) -> None:
    Path(path).write_text("\n".join(sentences) + "\n", encoding="utf-8")


def generate_original_tokens(
    seed: int = 11, size: int = 600, marker: str = "▁"
) -> tuple[list[str], list[str]]:
    """A score-less token list shaped like a pre-trained vocabulary.

    Returns (tokens, special_tokens): four specials, the ascii letters and
    space-marked letters, then word-initial pieces and continuation
    fragments of the word bank, deterministically subsampled to `size`.
    """
    specials = ["<pad>", "<unk>", "<s>", "</s>"]
    letters = [chr(c) for c in range(ord("a"), ord("z") + 1)]
    tokens: list[str] = list(specials)
    tokens += letters
    tokens += [marker + ch for ch in letters]
    tokens.append(marker)

    candidates: list[str] = []
    for word in WORDS:
        candidates.append(marker + word)
        if len(word) > 3:
            candidates.append(marker + word[:3])
            candidates.append(word[2:])
        if len(word) > 5:
            candidates.append(word[-3:])
    seen = set(tokens)
    pool = []
    for cand in candidates:
        if cand not in seen:
            seen.add(cand)
            pool.append(cand)
    rng = StreamRng.from_seed(seed)
    rng.shuffle(pool)
    tokens += pool[: max(0, size - len(tokens))]
    return tokens, specials


def char_vocab(corpus) -> "ScoredVocab":
    """Single-character baseline vocabulary with frequency scores."""
    from collections import Counter
    from math import log

    from .trainer import ScoredVocab

    counts: Counter[str] = Counter()
    for sent in corpus.sentences:
        counts.update(sent.text)
    total = sum(counts.values())
    entries = sorted(
        ((ch, log(c / total)) for ch, c in counts.items()),
        key=lambda e: (-e[1], e[0]),
    )
    return ScoredVocab(entries, corpus.marker)
