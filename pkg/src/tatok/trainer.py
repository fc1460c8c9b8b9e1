"""Unigram vocabulary training.

Expected token counts come from exact forward-backward marginals over
each sentence's lattice; pruning ranks tokens by the exact drop in corpus
log-likelihood when a token is removed and its probability mass is
redistributed over the survivors.  Single-character tokens are never
pruned, which keeps every corpus string segmentable.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import DEFAULT_MARKER, CorpusHandle
from .errors import ConfigError, CoverageError, DuplicateToken
from .lattice import Trie
from .seed import SeedVocab

logger = logging.getLogger(__name__)

VOCAB_TSV_VERSION = "tatok-vocab-v1"


class ScoredVocab:
    """Ordered token table with natural-log probability scores.

    Entry position is the token id.  Exposes the duck interface the
    lattice layer expects: `lattice_entries`, `token_of`, and `marker`.
    """

    def __init__(self, entries: list[tuple[str, float]], marker: str = DEFAULT_MARKER):
        tokens = [t for t, _ in entries]
        if len(set(tokens)) != len(tokens):
            raise DuplicateToken("vocabulary contains repeated token strings")
        self.entries: list[tuple[str, float]] = [(t, float(s)) for t, s in entries]
        self.marker = marker
        self._index = {t: i for i, (t, _) in enumerate(self.entries)}

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, ScoredVocab) and self.entries == other.entries

    def tokens(self) -> list[str]:
        return [t for t, _ in self.entries]

    def scores(self) -> list[float]:
        return [s for _, s in self.entries]

    @property
    def char_set(self) -> set[str]:
        return {t for t, _ in self.entries if len(t) == 1}

    def id_of(self, token: str) -> int | None:
        return self._index.get(token)

    def token_of(self, token_id: int) -> str | None:
        if 0 <= token_id < len(self.entries):
            return self.entries[token_id][0]
        return None

    def score_of(self, token: str) -> float | None:
        i = self._index.get(token)
        return None if i is None else self.entries[i][1]

    def lattice_entries(self):
        return [(i, t, s) for i, (t, s) in enumerate(self.entries)]

    def save_tsv(self, path: str | Path) -> None:
        lines = [
            f"# version {VOCAB_TSV_VERSION}",
            f"# marker {self.marker}",
            f"# charset {len(self.char_set)}",
        ]
        lines += [f"{t}\t{s!r}" for t, s in self.entries]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load_tsv(cls, path: str | Path) -> "ScoredVocab":
        marker = DEFAULT_MARKER
        entries: list[tuple[str, float]] = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            # Header lines carry no tab; tokens never contain one.
            if "\t" not in line:
                if line.startswith("# "):
                    parts = line[2:].split()
                    if len(parts) >= 2 and parts[0] == "marker":
                        marker = parts[1]
                continue
            token, score = line.split("\t")
            entries.append((token, float(score)))
        return cls(entries, marker)


@dataclass
class TrainConfig:
    """Knobs for the train loop; `seed` is reserved for future stochastic steps."""

    target_size: int
    em_iters_per_round: int = 2
    shrink_factor: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.shrink_factor < 1.0):
            raise ConfigError(f"shrink_factor must be in (0, 1), got {self.shrink_factor}")
        if self.target_size < 1:
            raise ConfigError(f"target_size must be >= 1, got {self.target_size}")
        if self.em_iters_per_round < 1:
            raise ConfigError("em_iters_per_round must be >= 1")


@dataclass
class RoundLog:
    """Per-round training record: vocabulary size and likelihood trajectory."""

    round_index: int
    size: int
    logliks: list[float] = field(default_factory=list)
    pruned: int = 0


class _SentEdges:
    """Structural lattice of one sentence over the current token set."""

    __slots__ = ("n", "inc", "inc_np")

    def __init__(self, n: int, inc, inc_np):
        self.n = n
        self.inc = inc          # per boundary: list of (start, token_index)
        self.inc_np = inc_np    # per boundary: (starts array, token array) or None


def _build_sent_edges(corpus: CorpusHandle, tokens: list[str]) -> list[_SentEdges]:
    trie = Trie((i, t, 0.0) for i, t in enumerate(tokens))
    sents = []
    for sent in corpus.sentences:
        s = sent.text
        n = len(s)
        inc: list[list[tuple[int, int]]] = [[] for _ in range(n + 1)]
        for i in range(n):
            for token_id, end, _ in trie.matches(s, i):
                inc[end].append((i, token_id))
        reach = [False] * (n + 1)
        reach[0] = True
        for j in range(1, n + 1):
            reach[j] = any(reach[i] for i, _ in inc[j])
        if n > 0 and not reach[n]:
            raise CoverageError(f"vocabulary cannot segment sentence {s!r}")
        inc_np = [
            (
                np.fromiter((i for i, _ in ed), dtype=np.int64),
                np.fromiter((t for _, t in ed), dtype=np.int64),
            )
            if ed
            else None
            for ed in inc
        ]
        sents.append(_SentEdges(n, inc, inc_np))
    return sents


def _logsumexp(vals: list[float]) -> float:
    m = max(vals)
    if m == -math.inf:
        return -math.inf
    return m + math.log(sum(math.exp(v - m) for v in vals))


def _forward(sent: _SentEdges, sc: list[float]) -> list[float]:
    f = [-math.inf] * (sent.n + 1)
    f[0] = 0.0
    for j in range(1, sent.n + 1):
        ed = sent.inc[j]
        if ed:
            f[j] = _logsumexp([f[i] + sc[t] for i, t in ed])
    return f


def _em_pass(sents: list[_SentEdges], scores: np.ndarray) -> tuple[np.ndarray, float]:
    """Expected counts and total log-likelihood under the given scores."""
    sc = scores.tolist()
    counts = [0.0] * len(sc)
    loglik = 0.0
    for sent in sents:
        n = sent.n
        f = _forward(sent, sc)
        z = f[n] if n > 0 else 0.0
        if z == -math.inf:
            raise CoverageError("sentence has zero probability mass under the model")
        b = [-math.inf] * (n + 1)
        b[n] = 0.0
        # Outgoing edges of boundary i are the incoming edges of later boundaries.
        out: list[list[tuple[int, int]]] = [[] for _ in range(n + 1)]
        for j in range(1, n + 1):
            for i, t in sent.inc[j]:
                out[i].append((j, t))
        for i in range(n - 1, -1, -1):
            if out[i]:
                b[i] = _logsumexp([sc[t] + b[j] for j, t in out[i]])
        for j in range(1, n + 1):
            for i, t in sent.inc[j]:
                counts[t] += math.exp(f[i] + sc[t] + b[j] - z)
        loglik += z
    return np.asarray(counts), loglik


def _normalized_scores(counts: np.ndarray) -> np.ndarray:
    total = counts.sum()
    if total <= 0.0:
        return np.full(len(counts), -np.inf)
    return np.where(counts > 0.0, np.log(np.maximum(counts, 1e-300) / total), -np.inf)


def _corpus_loglik(sents: list[_SentEdges], scores: np.ndarray) -> float:
    sc = scores.tolist()
    total = 0.0
    for sent in sents:
        z = _forward(sent, sc)[sent.n] if sent.n > 0 else 0.0
        if z == -math.inf:
            raise CoverageError("sentence has zero probability mass under the model")
        total += z
    return total


def _check_charset(vocab_tokens: set[str], corpus: CorpusHandle) -> None:
    missing = sorted(corpus.charset - vocab_tokens)
    if missing:
        raise CoverageError(f"vocabulary lacks corpus characters {missing!r}")


def em_step(vocab: ScoredVocab, corpus: CorpusHandle) -> tuple[ScoredVocab, float]:
    """One expectation-maximization step.

    Returns the re-estimated vocabulary and the corpus log-likelihood
    under the *input* scores.  An empty corpus is a no-op with
    log-likelihood 0.
    """
    if not corpus.sentences:
        return vocab, 0.0
    _check_charset(set(vocab.tokens()), corpus)
    sents = _build_sent_edges(corpus, vocab.tokens())
    counts, loglik = _em_pass(sents, np.asarray(vocab.scores()))
    scores = _normalized_scores(counts)
    entries = [(t, float(s)) for (t, _), s in zip(vocab.entries, scores)]
    return ScoredVocab(entries, vocab.marker), loglik


def _lse_axis0(m_rows: np.ndarray) -> np.ndarray:
    m = np.max(m_rows, axis=0)
    out = np.full(m_rows.shape[1], -np.inf)
    safe = m > -np.inf
    if np.any(safe):
        out[safe] = m[safe] + np.log(np.exp(m_rows[:, safe] - m[safe]).sum(axis=0))
    return out


def _length_resolved_mass(sent: _SentEdges, scores: np.ndarray) -> np.ndarray:
    """logW[k] = log of the summed probability of all k-token paths."""
    n = sent.n
    f = np.full((n + 1, n + 1), -np.inf)
    f[0, 0] = 0.0
    for j in range(1, n + 1):
        arr = sent.inc_np[j]
        if arr is None:
            continue
        starts, toks = arr
        # Shift the count axis by one token.
        m_rows = f[starts, : j] + scores[toks][:, None]
        f[j, 1 : j + 1] = _lse_axis0(m_rows)
    return f[n]


def _removal_logliks(
    sents: list[_SentEdges],
    scores: np.ndarray,
    cand_col: np.ndarray,
    c_vec: np.ndarray,
) -> np.ndarray:
    """Corpus log-likelihood after removing each candidate token.

    Every surviving edge weight gains the candidate's renormalization
    constant (a k-token path gains k of them), and the candidate's own
    edges drop out.  For candidates absent from a sentence no edge is
    masked, so the sentence term is a function of path length alone and
    comes from one length-resolved table; a masked forward pass runs only
    over the candidates that actually occur in the sentence.
    """
    n_cand = len(c_vec)
    total = np.zeros(n_cand)
    neg_inf = -np.inf
    max_n = max((s.n for s in sents), default=0)
    # outer(k, c): the k-token renormalization gain per candidate.
    gain = np.arange(max_n + 1, dtype=np.float64)[:, None] * c_vec[None, :]
    for sent in sents:
        n = sent.n
        if n == 0:
            continue
        log_w = _length_resolved_mass(sent, scores)
        z_unmasked = _lse_axis0(log_w[:, None] + gain[: n + 1])
        total += z_unmasked

        occurring = np.unique(
            np.concatenate([cand_col[arr[1]] for arr in sent.inc_np if arr is not None])
        )
        occurring = occurring[occurring >= 0]
        if len(occurring) == 0:
            continue
        c_sub = c_vec[occurring]
        f = np.full((n + 1, len(occurring)), neg_inf)
        f[0] = 0.0
        for j in range(1, n + 1):
            arr = sent.inc_np[j]
            if arr is None:
                continue
            starts, toks = arr
            m_rows = f[starts] + (scores[toks][:, None] + c_sub[None, :])
            cols = cand_col[toks]
            rows = np.nonzero(cols >= 0)[0]
            if len(rows):
                local = np.searchsorted(occurring, cols[rows])
                m_rows[rows, local] = neg_inf
            f[j] = _lse_axis0(m_rows)
        total[occurring] += f[n] - z_unmasked[occurring]
    return total


def token_losses(vocab: ScoredVocab, corpus: CorpusHandle) -> list[tuple[str, float]]:
    """Exact likelihood drop from removing each token.

    Single-character tokens are pinned with +inf (never removable).  The
    removed token's probability is redistributed proportionally over the
    remaining tokens before the likelihood is re-evaluated.
    """
    chars = vocab.char_set
    if not corpus.sentences:
        return [(t, math.inf if t in chars else 0.0) for t, _ in vocab.entries]
    _check_charset(set(vocab.tokens()), corpus)
    sents = _build_sent_edges(corpus, vocab.tokens())
    scores = np.asarray(vocab.scores())
    l_full = _corpus_loglik(sents, scores)

    cand_ids = np.asarray(
        [i for i, (t, _) in enumerate(vocab.entries) if t not in chars], dtype=np.int64
    )
    losses = {t: math.inf for t in chars}
    if len(cand_ids):
        p = np.exp(scores[cand_ids])
        p = np.minimum(p, np.nextafter(1.0, 0.0))
        c_vec = -np.log1p(-p)
        cand_col = np.full(len(vocab), -1, dtype=np.int64)
        cand_col[cand_ids] = np.arange(len(cand_ids))
        l_without = _removal_logliks(sents, scores, cand_col, c_vec)
        loss_vec = l_full - l_without
        for k, i in enumerate(cand_ids):
            losses[vocab.entries[int(i)][0]] = float(loss_vec[k])
    return [(t, losses[t]) for t, _ in vocab.entries]


def train(
    seed: SeedVocab,
    corpus: CorpusHandle,
    cfg: TrainConfig,
    log: list[RoundLog] | None = None,
) -> ScoredVocab:
    """Fit scores by EM and prune to the target size.

    Each round runs `em_iters_per_round` EM steps, ranks tokens by removal
    loss, and keeps the character union plus the best-scoring pieces down
    to max(target, shrink_factor * current size).  The returned entries
    are ordered by descending score, ties broken lexicographically.
    """
    tokens = [t for t, _ in seed.entries]
    freqs = np.asarray([f for _, f in seed.entries], dtype=np.float64)
    missing = corpus.charset - set(tokens)
    if missing:
        raise ConfigError(f"seed vocabulary lacks corpus characters {sorted(missing)!r}")

    n_chars = len(corpus.charset)
    target = cfg.target_size
    if target < n_chars:
        logger.warning(
            "target size %d is below the character floor %d; result will have %d entries",
            target, n_chars, n_chars,
        )
        target = n_chars
    if len(tokens) < target:
        logger.warning(
            "seed vocabulary (%d) is smaller than the target (%d); nothing to prune",
            len(tokens), target,
        )

    scores = _normalized_scores(freqs)
    round_index = 0
    while True:
        sents = _build_sent_edges(corpus, tokens)
        record = RoundLog(round_index, len(tokens))
        for _ in range(cfg.em_iters_per_round):
            counts, loglik = _em_pass(sents, scores)
            record.logliks.append(loglik)
            # Exact EM never yields a zero count; float underflow can.  The
            # floor keeps starved-but-required tokens recoverable.
            scores = _normalized_scores(np.maximum(counts, 1e-300))
        if log is not None:
            log.append(record)
        if len(tokens) <= target:
            break

        vocab = ScoredVocab(list(zip(tokens, scores.tolist())), corpus.marker)
        losses = dict(token_losses(vocab, corpus))
        keep_total = max(target, int(cfg.shrink_factor * len(tokens)))
        chars = [t for t in tokens if len(t) == 1]
        pieces = [t for t in tokens if len(t) > 1]
        pieces.sort(key=lambda t: (-losses[t], len(t), t))
        keep = set(chars) | set(pieces[: max(keep_total - len(chars), 0)])
        kept = [(t, s) for t, s in zip(tokens, scores.tolist()) if t in keep]
        record.pruned = len(tokens) - len(kept)
        tokens = [t for t, _ in kept]
        scores = np.asarray([s for _, s in kept])
        round_index += 1

    entries = sorted(zip(tokens, scores.tolist()), key=lambda e: (-e[1], e[0]))
    return ScoredVocab(entries, corpus.marker)
