"""Declarative pipeline configuration.

One YAML document binds corpus, training, sampling, merging, embedding,
and output settings, so a run is reproducible from the file plus a seed.
Validation aggregates every problem with its field path instead of
failing on the first.  The TAT_SEED environment variable takes precedence
over both the file and command-line flags.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .corpus import CHARACTER, DEFAULT_MARKER, WHITESPACE_WORD
from .errors import ConfigValidationError
from .merge import TRANSLATIONS

LENGTH_UNIT_NAMES = {"word": WHITESPACE_WORD, "char": CHARACTER}


@dataclass
class PipelineConfig:
    corpus_path: str | None = None
    length_unit: str = "word"
    marker: str = DEFAULT_MARKER

    target_size: int = 10000
    seed_size: int | None = None  # None: 2 * target_size
    max_piece_len: int = 24
    em_iters_per_round: int = 2
    shrink_factor: float = 0.75

    alpha: float = 0.5

    original_vocab: str | None = None
    original_format: str = "auto"  # auto | list | tsv | json
    special_tokens: list[str] = field(default_factory=list)
    big_score: float | None = None  # None: derived from the task vocabulary
    marker_translation: str = "none"
    keep_original_scores: bool = False

    embedding_matrix: str | None = None
    output_dir: str = "out"
    seed: int = 0
    sweep_sizes: list[int] = field(default_factory=list)

    @property
    def length_unit_mode(self) -> str:
        return LENGTH_UNIT_NAMES[self.length_unit]

    def resolved_seed_size(self, target: int | None = None) -> int:
        n = target if target is not None else self.target_size
        return self.seed_size if self.seed_size is not None else 2 * n

    def to_yaml(self) -> str:
        doc = {
            "corpus": {
                "path": self.corpus_path,
                "length_unit": self.length_unit,
                "marker": self.marker,
            },
            "train": {
                "target_size": self.target_size,
                "seed_size": self.seed_size,
                "max_piece_len": self.max_piece_len,
                "em_iters_per_round": self.em_iters_per_round,
                "shrink_factor": self.shrink_factor,
            },
            "sampler": {"alpha": self.alpha},
            "merge": {
                "original_vocab": self.original_vocab,
                "format": self.original_format,
                "special_tokens": list(self.special_tokens),
                "big_score": self.big_score,
                "marker_translation": self.marker_translation,
                "keep_original_scores": self.keep_original_scores,
            },
            "embedding": {"matrix": self.embedding_matrix},
            "output_dir": self.output_dir,
            "seed": self.seed,
            "sweep": {"sizes": list(self.sweep_sizes)},
        }
        return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)


_SECTIONS = {"corpus", "train", "sampler", "merge", "embedding", "output_dir", "seed", "sweep"}


def _get(section: dict, errors, path: str, key: str, kind, default):
    value = section.get(key, default)
    if value is None:
        return None
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        errors.append((f"{path}.{key}", f"expected {kind.__name__}, got {type(value).__name__}"))
        return default
    return value


def validate(raw: dict | None, base_dir: str | Path = ".") -> PipelineConfig:
    """Check the parsed document, fill defaults, and resolve paths.

    Raises ConfigValidationError carrying every (field path, message) pair.
    """
    raw = raw or {}
    errors: list[tuple[str, str]] = []
    base = Path(base_dir)
    cfg = PipelineConfig()

    for key in raw:
        if key not in _SECTIONS:
            errors.append((key, "unknown section"))

    corpus = raw.get("corpus") or {}
    cfg.corpus_path = _get(corpus, errors, "corpus", "path", str, None)
    cfg.length_unit = _get(corpus, errors, "corpus", "length_unit", str, "word")
    cfg.marker = _get(corpus, errors, "corpus", "marker", str, DEFAULT_MARKER)
    if cfg.length_unit not in LENGTH_UNIT_NAMES:
        errors.append(("corpus.length_unit", f"must be one of {sorted(LENGTH_UNIT_NAMES)}"))
    if cfg.marker is not None and len(cfg.marker) != 1:
        errors.append(("corpus.marker", "must be a single character"))
    if cfg.corpus_path is not None:
        cfg.corpus_path = str(base / cfg.corpus_path)
        if not Path(cfg.corpus_path).exists():
            errors.append(("corpus.path", f"file not found: {cfg.corpus_path}"))

    train = raw.get("train") or {}
    cfg.target_size = _get(train, errors, "train", "target_size", int, 10000)
    seed_size = train.get("seed_size", None)
    if seed_size in (None, "auto"):
        cfg.seed_size = None
    elif isinstance(seed_size, int):
        cfg.seed_size = seed_size
    else:
        errors.append(("train.seed_size", "expected an integer or 'auto'"))
    cfg.max_piece_len = _get(train, errors, "train", "max_piece_len", int, 24)
    cfg.em_iters_per_round = _get(train, errors, "train", "em_iters_per_round", int, 2)
    cfg.shrink_factor = _get(train, errors, "train", "shrink_factor", float, 0.75)
    if cfg.target_size is not None and cfg.target_size < 1:
        errors.append(("train.target_size", "target_size below charset floor"))
    if cfg.max_piece_len is not None and cfg.max_piece_len < 1:
        errors.append(("train.max_piece_len", "must be >= 1"))
    if cfg.em_iters_per_round is not None and cfg.em_iters_per_round < 1:
        errors.append(("train.em_iters_per_round", "must be >= 1"))
    if cfg.shrink_factor is not None and not (0.0 < cfg.shrink_factor < 1.0):
        errors.append(("train.shrink_factor", "must be in (0, 1)"))

    sampler = raw.get("sampler") or {}
    cfg.alpha = _get(sampler, errors, "sampler", "alpha", float, 0.5)
    if cfg.alpha is not None and cfg.alpha < 0:
        errors.append(("sampler.alpha", "must be >= 0"))

    merge_sec = raw.get("merge") or {}
    cfg.original_vocab = _get(merge_sec, errors, "merge", "original_vocab", str, None)
    cfg.original_format = _get(merge_sec, errors, "merge", "format", str, "auto")
    specials = merge_sec.get("special_tokens", [])
    if isinstance(specials, list) and all(isinstance(s, str) for s in specials):
        cfg.special_tokens = specials
    else:
        errors.append(("merge.special_tokens", "expected a list of strings"))
    big = merge_sec.get("big_score", None)
    if big in (None, "auto"):
        cfg.big_score = None
    elif isinstance(big, (int, float)):
        cfg.big_score = float(big)
    else:
        errors.append(("merge.big_score", "expected a number or 'auto'"))
    cfg.marker_translation = _get(merge_sec, errors, "merge", "marker_translation", str, "none")
    cfg.keep_original_scores = _get(
        merge_sec, errors, "merge", "keep_original_scores", bool, False
    )
    if cfg.original_format not in ("auto", "list", "tsv", "json"):
        errors.append(("merge.format", "must be auto, list, tsv, or json"))
    if cfg.marker_translation not in TRANSLATIONS:
        errors.append(("merge.marker_translation", f"must be one of {TRANSLATIONS}"))
    if cfg.original_vocab is not None:
        cfg.original_vocab = str(base / cfg.original_vocab)
        if not Path(cfg.original_vocab).exists():
            errors.append(("merge.original_vocab", f"file not found: {cfg.original_vocab}"))

    embedding = raw.get("embedding") or {}
    cfg.embedding_matrix = _get(embedding, errors, "embedding", "matrix", str, None)
    if cfg.embedding_matrix is not None:
        cfg.embedding_matrix = str(base / cfg.embedding_matrix)
        if not Path(cfg.embedding_matrix).exists():
            errors.append(("embedding.matrix", f"file not found: {cfg.embedding_matrix}"))

    out_dir = raw.get("output_dir", "out")
    if isinstance(out_dir, str):
        cfg.output_dir = out_dir
    else:
        errors.append(("output_dir", "expected a string"))

    seed = raw.get("seed", 0)
    if isinstance(seed, int):
        cfg.seed = seed
    else:
        errors.append(("seed", "expected an integer"))

    sweep = raw.get("sweep") or {}
    sizes = sweep.get("sizes", [])
    if isinstance(sizes, list) and all(isinstance(s, int) and s > 0 for s in sizes):
        cfg.sweep_sizes = sizes
    else:
        errors.append(("sweep.sizes", "expected a list of positive integers"))

    env_seed = os.environ.get("TAT_SEED")
    if env_seed is not None:
        try:
            cfg.seed = int(env_seed)
        except ValueError:
            errors.append(("seed", f"TAT_SEED is not an integer: {env_seed!r}"))

    if errors:
        raise ConfigValidationError(errors)
    return cfg


def load_config(path: str | Path) -> PipelineConfig:
    """Parse and validate a YAML config file; paths resolve from its directory."""
    text = Path(path).read_text(encoding="utf-8")
    return validate(yaml.safe_load(text), Path(path).parent)
