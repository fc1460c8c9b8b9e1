"""Tokenization efficiency and vocabulary composition reports."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

from .corpus import CorpusHandle
from .errors import EmptyInput, UnknownTokenId
from .lattice import SamplerConfig, Segmentation, build_lattice, sample, viterbi
from .merge import MergedVocab

# Token-length intervals (lo, hi], in characters including markers.
DEFAULT_BUCKETS = ((0, 6), (6, 12), (12, 18), (18, 24), (24, 30), (30, 32))


@dataclass
class EfficiencyReport:
    """Corpus means: tokens per text, length units per text, and their ratio.

    `wall_centisec` times the encode path only (lattice build plus search),
    median of `timing_runs` sweeps, expressed per text.
    """

    n_tok: float
    len_units: float
    len_per_tok: float
    wall_centisec: float
    n_texts: int

    def to_dict(self) -> dict:
        return {
            "n_tok": self.n_tok,
            "len_units": self.len_units,
            "len_per_tok": self.len_per_tok,
            "wall_centisec": self.wall_centisec,
            "n_texts": self.n_texts,
        }


@dataclass
class ConstitutionReport:
    """Character-length share of overlap / task-only / original-only tokens."""

    overlap_frac: float
    non_overlap_frac: float
    original_frac: float

    def to_dict(self) -> dict:
        return {
            "overlap_frac": self.overlap_frac,
            "non_overlap_frac": self.non_overlap_frac,
            "original_frac": self.original_frac,
        }


def _encode_all(corpus: CorpusHandle, vocab, mode: str, cfg: SamplerConfig | None):
    segs = []
    for index, sent in enumerate(corpus.sentences):
        lat = build_lattice(sent.text, vocab)
        if mode == "viterbi":
            segs.append(viterbi(lat))
        elif mode == "sample":
            segs.append(sample(lat, cfg if cfg is not None else SamplerConfig(), index))
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return segs


def efficiency(
    corpus: CorpusHandle,
    vocab,
    mode: str = "viterbi",
    cfg: SamplerConfig | None = None,
    timing_runs: int = 5,
) -> EfficiencyReport:
    """Encode every sentence and aggregate means.

    Length is counted in the corpus handle's own units (characters or
    whitespace words).
    """
    if not corpus.sentences:
        raise EmptyInput("efficiency needs at least one text")
    walls = []
    segs = []
    for _ in range(max(1, timing_runs)):
        t0 = time.perf_counter()
        segs = _encode_all(corpus, vocab, mode, cfg)
        walls.append(time.perf_counter() - t0)
    n = len(corpus.sentences)
    mean_tok = sum(len(s.token_ids) for s in segs) / n
    mean_len = sum(s.original_length_units for s in corpus.sentences) / n
    return EfficiencyReport(
        n_tok=mean_tok,
        len_units=mean_len,
        len_per_tok=mean_len / mean_tok if mean_tok > 0 else 0.0,
        wall_centisec=statistics.median(walls) / n * 100.0,
        n_texts=n,
    )


def constitution(segmentations: list[Segmentation], merged: MergedVocab) -> ConstitutionReport:
    """Classify every token by provenance, weighted by its character length."""
    if not segmentations:
        raise EmptyInput("constitution needs at least one segmentation")
    weights = {"overlap": 0.0, "task": 0.0, "original": 0.0}
    for seg in segmentations:
        for token_id in seg.token_ids:
            entry = merged.entry_of(token_id)
            weights[entry.origin] += len(entry.token)
    total = sum(weights.values())
    if total == 0.0:
        raise EmptyInput("segmentations contain no tokens")
    return ConstitutionReport(
        overlap_frac=weights["overlap"] / total,
        non_overlap_frac=weights["task"] / total,
        original_frac=weights["original"] / total,
    )


def _score_entries(vocab):
    if isinstance(vocab, MergedVocab):
        return [(e.token, e.score) for e in vocab.entries if not e.never_sample]
    return list(vocab.entries)


def length_bucket_table(vocab, buckets=DEFAULT_BUCKETS, k: int = 5) -> list[dict]:
    """Top-k tokens by score within each (lo, hi] length interval."""
    spans = sorted(buckets)
    for (lo1, hi1), (lo2, _) in zip(spans, spans[1:]):
        if lo2 < hi1:
            raise ValueError(f"buckets overlap: ({lo1}, {hi1}] and ({lo2}, ...]")
    rows = []
    entries = _score_entries(vocab)
    for lo, hi in buckets:
        inside = [(t, s) for t, s in entries if lo < len(t) <= hi]
        inside.sort(key=lambda e: (-e[1], e[0]))
        rows.append(
            {
                "bucket": [lo, hi],
                "tokens": [{"token": t, "score": s} for t, s in inside[:k]],
            }
        )
    return rows


def format_efficiency(report: EfficiencyReport) -> str:
    head = f"{'#Tok':>10} {'Len':>10} {'Len/#Tok':>10} {'#cSec':>10}"
    row = (
        f"{report.n_tok:>10.2f} {report.len_units:>10.2f} "
        f"{report.len_per_tok:>10.3f} {report.wall_centisec:>10.3f}"
    )
    return head + "\n" + row


def format_constitution(report: ConstitutionReport) -> str:
    head = f"{'overlap':>12} {'non-overlap':>12} {'original':>12}"
    row = (
        f"{report.overlap_frac:>11.1%} {report.non_overlap_frac:>12.1%} "
        f"{report.original_frac:>12.1%}"
    )
    return head + "\n" + row


def format_buckets(rows: list[dict]) -> str:
    out = []
    for row in rows:
        lo, hi = row["bucket"]
        tokens = ", ".join(t["token"] for t in row["tokens"]) or "-"
        out.append(f"({lo:>3}, {hi:>3}]  {tokens}")
    return "\n".join(out)
