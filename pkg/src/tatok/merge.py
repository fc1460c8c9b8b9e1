"""Merging a trained task vocabulary into a pre-trained model's vocabulary.

The union is deterministic and id-stable: every original token keeps its
id, so the model's embedding matrix can be extended instead of rebuilt.
Task-only tokens are appended afterwards in their trained order.  Scores
follow four rules: special tokens are flagged never-sampled; score-less
original tokens get -big_score * (len+1)/len, which keeps them strictly
below every task token while still favoring longer matches; tokens in
both vocabularies keep their original id but adopt the task score; and
order is always preserved.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .corpus import DEFAULT_MARKER
from .errors import ConfigError, DuplicateToken, UnknownTokenId, ZeroLength
from .trainer import ScoredVocab

logger = logging.getLogger(__name__)

MERGED_JSON_VERSION = "tatok-merged-v1"
SPECIAL_SCORE = 0.0  # placeholder only; never_sample keeps it out of lattices

TRANSLATIONS = ("none", "metaspace", "byte", "wordpiece")


class OriginalVocab:
    """A pre-trained model's token list, ids dense from 0."""

    def __init__(self, tokens, special_tokens=(), scores=None):
        self.tokens = list(tokens)
        if len(set(self.tokens)) != len(self.tokens):
            raise DuplicateToken("original vocabulary contains repeated tokens")
        if any(not t for t in self.tokens):
            raise ZeroLength("original vocabulary contains an empty token")
        self.special_tokens = set(special_tokens)
        unknown = self.special_tokens - set(self.tokens)
        if unknown:
            raise ConfigError(f"special tokens {sorted(unknown)!r} not in vocabulary")
        self.scores = list(scores) if scores is not None else None
        if self.scores is not None and len(self.scores) != len(self.tokens):
            raise ConfigError("scores length does not match token count")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def has_scores(self) -> bool:
        return self.scores is not None

    @classmethod
    def from_token_lines(cls, path: str | Path, special_tokens=()) -> "OriginalVocab":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls([ln for ln in lines if ln], special_tokens)

    @classmethod
    def from_tsv(cls, path: str | Path, special_tokens=()) -> "OriginalVocab":
        tokens, scores = [], []
        for ln in Path(path).read_text(encoding="utf-8").splitlines():
            if "\t" not in ln:  # header or blank
                continue
            token, score = ln.split("\t")
            tokens.append(token)
            scores.append(float(score))
        return cls(tokens, special_tokens, scores)

    @classmethod
    def from_json_map(cls, path: str | Path, special_tokens=()) -> "OriginalVocab":
        mapping = json.loads(Path(path).read_text(encoding="utf-8"))
        ids = sorted(mapping.values())
        if ids != list(range(len(mapping))):
            raise ConfigError("token ids must be dense from 0")
        by_id = sorted(mapping.items(), key=lambda kv: kv[1])
        return cls([t for t, _ in by_id], special_tokens)

    @classmethod
    def from_merged(cls, merged: "MergedVocab") -> "OriginalVocab":
        return cls(
            [e.token for e in merged.entries],
            {e.token for e in merged.entries if e.never_sample},
            [e.score for e in merged.entries],
        )


@dataclass
class MergeConfig:
    """`big_score` is a positive magnitude; None derives it from the task vocab."""

    big_score: float | None = None
    marker_translation: str = "none"
    source_marker: str = DEFAULT_MARKER
    keep_original_scores: bool = False

    def __post_init__(self):
        if self.marker_translation not in TRANSLATIONS:
            raise ConfigError(
                f"marker_translation must be one of {TRANSLATIONS}, got {self.marker_translation!r}"
            )


@dataclass(frozen=True)
class MergedEntry:
    id: int
    token: str
    score: float
    origin: str  # "original" | "task" | "overlap"
    never_sample: bool


def translate_token(
    token: str, convention: str, marker: str = DEFAULT_MARKER, source_marker: str = DEFAULT_MARKER
) -> str:
    """Rewrite an original-vocabulary token into this toolkit's marker form.

    Untranslatable byte artifacts pass through verbatim.
    """
    if convention == "none":
        return token
    if convention == "metaspace":
        return token.replace(source_marker, marker)
    if convention == "byte":
        return token.replace("Ġ", marker)  # 'Ġ', the byte-level space
    if convention == "wordpiece":
        if token.startswith("##"):
            return token[2:] if len(token) > 2 else token
        return marker + token
    raise ConfigError(f"unknown marker translation {convention!r}")


def untranslate_token(
    token: str, convention: str, marker: str = DEFAULT_MARKER, source_marker: str = DEFAULT_MARKER
) -> str:
    """Inverse of `translate_token`, for handing surfaces back to the original tokenizer."""
    if convention == "none":
        return token
    if convention == "metaspace":
        return token.replace(marker, source_marker)
    if convention == "byte":
        return token.replace(marker, "Ġ")
    if convention == "wordpiece":
        if token.startswith(marker):
            return token[len(marker):]
        return "##" + token
    raise ConfigError(f"unknown marker translation {convention!r}")


def assign_score(token: str, big_score: float) -> float:
    """Score for a score-less original token: -big_score * (len+1)/len.

    Strictly below -big_score for every length, and strictly increasing in
    token length, so longer original matches win among themselves but any
    task token outranks them all.
    """
    length = len(token)
    if length < 1:
        raise ZeroLength("cannot score an empty token")
    return -big_score * (length + 1) / length


def default_big_score(task: ScoredVocab) -> float:
    """Magnitude of the lowest task score; makes the ordering constraint hold."""
    return abs(min(s for _, s in task.entries))


class MergedVocab:
    """Id-stable union of an original and a task vocabulary."""

    def __init__(
        self,
        entries: list[MergedEntry],
        original_size: int,
        marker: str,
        big_score: float,
        marker_translation: str = "none",
    ):
        self.entries = entries
        self.original_size = original_size
        self.marker = marker
        self.big_score = big_score
        self.marker_translation = marker_translation
        self._index = {e.token: e.id for e in entries}

    def __len__(self) -> int:
        return len(self.entries)

    def id_of(self, token: str) -> int | None:
        return self._index.get(token)

    def token_of(self, token_id: int) -> str | None:
        if 0 <= token_id < len(self.entries):
            return self.entries[token_id].token
        return None

    def entry_of(self, token_id: int) -> MergedEntry:
        if not (0 <= token_id < len(self.entries)):
            raise UnknownTokenId(f"id {token_id} not in merged vocabulary")
        return self.entries[token_id]

    def lattice_entries(self):
        return [(e.id, e.token, e.score) for e in self.entries if not e.never_sample]

    def save_json(self, path: str | Path) -> None:
        doc = {
            "version": MERGED_JSON_VERSION,
            "marker": self.marker,
            "big_score": self.big_score,
            "original_size": self.original_size,
            "marker_translation": self.marker_translation,
            "entries": [
                {
                    "id": e.id,
                    "token": e.token,
                    "score": e.score,
                    "origin": e.origin,
                    "never_sample": e.never_sample,
                }
                for e in self.entries
            ],
        }
        Path(path).write_text(
            json.dumps(doc, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
        )

    @classmethod
    def load_json(cls, path: str | Path) -> "MergedVocab":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        entries = [
            MergedEntry(e["id"], e["token"], e["score"], e["origin"], e["never_sample"])
            for e in doc["entries"]
        ]
        return cls(
            entries,
            doc["original_size"],
            doc["marker"],
            doc["big_score"],
            doc.get("marker_translation", "none"),
        )


def merge(orig: OriginalVocab, task: ScoredVocab, cfg: MergeConfig) -> MergedVocab:
    """Apply the merging rules; see the module docstring for their effect."""
    translated = [
        t if t in orig.special_tokens
        else translate_token(t, cfg.marker_translation, task.marker, cfg.source_marker)
        for t in orig.tokens
    ]
    if cfg.marker_translation != "none":
        changed = sum(1 for a, b in zip(orig.tokens, translated) if a != b)
        logger.info(
            "marker translation %r rewrote %d of %d original tokens",
            cfg.marker_translation, changed, len(orig.tokens),
        )
    if len(set(translated)) != len(translated):
        raise DuplicateToken("marker translation makes two original tokens collide")

    min_task = min(s for _, s in task.entries)
    big = cfg.big_score if cfg.big_score is not None else default_big_score(task)
    if big <= 0.0:
        raise ConfigError(f"big_score must be positive, got {big}")
    if big < abs(min_task):
        raise ConfigError(
            f"big_score {big} is below the lowest task score magnitude {abs(min_task)}; "
            "original tokens could outrank task tokens"
        )

    task_score = {t: s for t, s in task.entries}
    entries: list[MergedEntry] = []
    absorbed: set[str] = set()
    for i, token in enumerate(translated):
        if orig.tokens[i] in orig.special_tokens:
            entries.append(MergedEntry(i, token, SPECIAL_SCORE, "original", True))
            absorbed.add(token)
        elif token in task_score:
            entries.append(MergedEntry(i, token, task_score[token], "overlap", False))
            absorbed.add(token)
        elif cfg.keep_original_scores and orig.has_scores:
            entries.append(MergedEntry(i, token, float(orig.scores[i]), "original", False))
        else:
            entries.append(MergedEntry(i, token, assign_score(token, big), "original", False))

    next_id = len(translated)
    for token, score in task.entries:
        if token in absorbed:
            continue
        entries.append(MergedEntry(next_id, token, score, "task", False))
        next_id += 1

    return MergedVocab(entries, len(translated), task.marker, big, cfg.marker_translation)
