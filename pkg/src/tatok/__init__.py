"""Task-adaptive tokenization toolkit.

Builds a task-specific variable-granularity vocabulary with a unigram
model, merges it into a pre-trained model's vocabulary without moving any
existing token id, segments text over the merged table (exact best path
or regularized sampling), and plans mean-of-subwords initialization for
the appended embedding rows.
"""

from .corpus import (
    CorpusHandle,
    DEFAULT_MARKER,
    NormalizedSentence,
    denormalize,
    ingest,
    ingest_lines,
    normalize_text,
)
from .embedding import EmbeddingMatrix, MappingPlan, PlanItem, extend_matrix, plan_mapping
from .errors import (
    ConfigError,
    ConfigValidationError,
    CoverageError,
    DimensionMismatch,
    DisconnectedLattice,
    DuplicateToken,
    EmptyInput,
    EncodingError,
    MarkerCollision,
    PlanGap,
    SegmentationFailure,
    TatError,
    UnknownTokenId,
    ZeroLength,
)
from .lattice import (
    Lattice,
    SamplerConfig,
    Segmentation,
    build_lattice,
    decode,
    encode,
    marginal_loglik,
    nbest,
    sample,
    sample_histogram,
    viterbi,
)
from .merge import (
    MergeConfig,
    MergedEntry,
    MergedVocab,
    OriginalVocab,
    assign_score,
    default_big_score,
    merge,
)
from .metrics import (
    ConstitutionReport,
    EfficiencyReport,
    constitution,
    efficiency,
    length_bucket_table,
)
from .seed import SeedVocab, extract_seed
from .trainer import RoundLog, ScoredVocab, TrainConfig, em_step, token_losses, train

__version__ = "0.1.0"

__all__ = [
    "CorpusHandle",
    "NormalizedSentence",
    "DEFAULT_MARKER",
    "ingest",
    "ingest_lines",
    "normalize_text",
    "denormalize",
    "SeedVocab",
    "extract_seed",
    "ScoredVocab",
    "TrainConfig",
    "RoundLog",
    "em_step",
    "token_losses",
    "train",
    "Lattice",
    "Segmentation",
    "SamplerConfig",
    "build_lattice",
    "viterbi",
    "nbest",
    "marginal_loglik",
    "sample",
    "sample_histogram",
    "encode",
    "decode",
    "OriginalVocab",
    "MergeConfig",
    "MergedEntry",
    "MergedVocab",
    "assign_score",
    "default_big_score",
    "merge",
    "EmbeddingMatrix",
    "MappingPlan",
    "PlanItem",
    "plan_mapping",
    "extend_matrix",
    "EfficiencyReport",
    "ConstitutionReport",
    "efficiency",
    "constitution",
    "length_bucket_table",
    "TatError",
    "MarkerCollision",
    "EncodingError",
    "ConfigError",
    "ConfigValidationError",
    "CoverageError",
    "DisconnectedLattice",
    "UnknownTokenId",
    "DuplicateToken",
    "ZeroLength",
    "SegmentationFailure",
    "DimensionMismatch",
    "PlanGap",
    "EmptyInput",
]
