"""Embedding-row planning and extension for newly added tokens.

Each token that exists only in the task vocabulary is segmented into
subwords of the original tokenizer; its initial embedding row is the
arithmetic mean of those subword rows.  Overlapping and original tokens
keep their existing rows untouched.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, PlanGap, SegmentationFailure
from .lattice import Trie
from .merge import MergedVocab, untranslate_token

MATRIX_MAGIC = b"TATE"


class EmbeddingMatrix:
    """Row-major float32 matrix; row index is the token id."""

    def __init__(self, data: np.ndarray):
        arr = np.asarray(data, dtype=np.float32)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected a 2-d matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DimensionMismatch("matrix contains non-finite values")
        self.data = arr

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def save_binary(self, path: str | Path) -> None:
        with open(path, "wb") as fh:
            fh.write(MATRIX_MAGIC)
            fh.write(struct.pack("<II", self.rows, self.dim))
            fh.write(np.ascontiguousarray(self.data, dtype="<f4").tobytes())

    @classmethod
    def load_binary(cls, path: str | Path) -> "EmbeddingMatrix":
        blob = Path(path).read_bytes()
        if blob[:4] != MATRIX_MAGIC:
            raise DimensionMismatch(f"{path}: bad magic bytes {blob[:4]!r}")
        rows, dim = struct.unpack("<II", blob[4:12])
        expected = 12 + rows * dim * 4
        if len(blob) != expected:
            raise DimensionMismatch(f"{path}: expected {expected} bytes, found {len(blob)}")
        arr = np.frombuffer(blob, dtype="<f4", offset=12).reshape(rows, dim)
        return cls(arr.astype(np.float32))

    def save_text(self, path: str | Path) -> None:
        lines = [" ".join(repr(float(v)) for v in row) for row in self.data]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load_text(cls, path: str | Path) -> "EmbeddingMatrix":
        rows = [
            [float(v) for v in ln.split()]
            for ln in Path(path).read_text(encoding="utf-8").splitlines()
            if ln.strip()
        ]
        return cls(np.asarray(rows, dtype=np.float32))


@dataclass(frozen=True)
class PlanItem:
    new_id: int
    token: str
    source_ids: tuple[int, ...]


@dataclass
class MappingPlan:
    """Which original rows initialize each appended token, ordered by new id."""

    items: list[PlanItem]

    def save_json(self, path: str | Path) -> None:
        doc = [
            {"new_id": it.new_id, "token": it.token, "source_ids": list(it.source_ids)}
            for it in self.items
        ]
        Path(path).write_text(
            json.dumps(doc, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
        )

    @classmethod
    def load_json(cls, path: str | Path) -> "MappingPlan":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls([PlanItem(d["new_id"], d["token"], tuple(d["source_ids"])) for d in doc])


def greedy_segmenter(merged: MergedVocab) -> Callable[[str], list[int]]:
    """Longest-match segmentation over the original (non-special) tokens.

    Fallback for when the actual pre-trained tokenizer is not available;
    operates in this toolkit's marker space.
    """
    trie = Trie(
        (e.id, e.token, 0.0)
        for e in merged.entries
        if e.id < merged.original_size and not e.never_sample
    )

    def segment(surface: str) -> list[int]:
        ids: list[int] = []
        pos = 0
        while pos < len(surface):
            last = None
            for token_id, end, _ in trie.matches(surface, pos):
                last = (token_id, end)
            if last is None:
                raise SegmentationFailure(
                    f"no original token matches {surface!r} at offset {pos}"
                )
            ids.append(last[0])
            pos = last[1]
        return ids

    return segment


def plan_mapping(
    merged: MergedVocab,
    orig_segmenter: Callable[[str], list[int]] | None = None,
) -> MappingPlan:
    """One plan item per task-only token.

    A user-supplied segmenter receives each token in the original
    tokenizer's own convention; the built-in fallback works directly on
    the merged surface forms.
    """
    fallback = orig_segmenter is None
    segment = greedy_segmenter(merged) if fallback else orig_segmenter
    items: list[PlanItem] = []
    for entry in merged.entries:
        if entry.origin != "task":
            continue
        surface = entry.token if fallback else untranslate_token(
            entry.token, merged.marker_translation, merged.marker
        )
        ids = list(segment(surface))
        if not ids:
            raise SegmentationFailure(f"segmenter returned nothing for {entry.token!r}")
        if any(not (0 <= i < merged.original_size) for i in ids):
            raise SegmentationFailure(
                f"segmenter returned non-original ids {ids!r} for {entry.token!r}"
            )
        items.append(PlanItem(entry.id, entry.token, tuple(int(i) for i in ids)))
    items.sort(key=lambda it: it.new_id)
    return MappingPlan(items)


def extend_matrix(orig: EmbeddingMatrix, plan: MappingPlan, merged_size: int) -> EmbeddingMatrix:
    """Grow the matrix to `merged_size` rows.

    Original rows are copied bit-exact; each new row is the mean of its
    source rows, accumulated in float64 and rounded to float32 once.
    """
    if merged_size < orig.rows:
        raise DimensionMismatch(
            f"merged size {merged_size} is below the original row count {orig.rows}"
        )
    by_id = {}
    for item in plan.items:
        if not (orig.rows <= item.new_id < merged_size):
            raise PlanGap(f"plan id {item.new_id} outside the appended range")
        if item.new_id in by_id:
            raise PlanGap(f"plan lists id {item.new_id} twice")
        if any(not (0 <= s < orig.rows) for s in item.source_ids):
            raise DimensionMismatch(f"plan for id {item.new_id} references missing rows")
        by_id[item.new_id] = item
    missing = [i for i in range(orig.rows, merged_size) if i not in by_id]
    if missing:
        raise PlanGap(f"no plan items for appended ids {missing!r}")

    out = np.empty((merged_size, orig.dim), dtype=np.float32)
    out[: orig.rows] = orig.data
    for new_id in range(orig.rows, merged_size):
        src = orig.data[list(by_id[new_id].source_ids)].astype(np.float64)
        out[new_id] = src.mean(axis=0).astype(np.float32)
    return EmbeddingMatrix(out)
