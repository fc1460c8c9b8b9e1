"""Segmentation lattices over a scored vocabulary.

A lattice spans the character boundaries of one normalized string; its
edges are vocabulary matches found with a prefix trie.  On top of it sit
exact best-path search, n-best enumeration, marginal likelihood, and
stochastic path sampling (forward filtering with scaled weights, then
categorical backward draws).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import DEFAULT_MARKER, denormalize, normalize_text
from .errors import CoverageError, DisconnectedLattice, UnknownTokenId
from .rng import float_at, floats_at_np, stream_key, stream_keys_np


@dataclass(frozen=True)
class Segmentation:
    """One path through a lattice: ids, surface pieces, and its log score."""

    token_ids: tuple[int, ...]
    pieces: tuple[str, ...]
    logprob: float


@dataclass(frozen=True)
class SamplerConfig:
    """Stochastic segmentation parameters.

    `alpha` scales path weights: a path is drawn with probability
    proportional to exp(alpha * logprob).  alpha=0 is uniform over paths;
    large alpha concentrates on the best path.
    """

    alpha: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 0.0):
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")


class _TrieNode:
    __slots__ = ("children", "payload")

    def __init__(self):
        self.children: dict[str, _TrieNode] = {}
        self.payload: tuple[int, float] | None = None  # (token_id, score)


class Trie:
    """Prefix index over vocabulary tokens for lattice edge matching."""

    def __init__(self, entries):
        self.root = _TrieNode()
        for token_id, token, score in entries:
            node = self.root
            for ch in token:
                nxt = node.children.get(ch)
                if nxt is None:
                    nxt = _TrieNode()
                    node.children[ch] = nxt
                node = nxt
            node.payload = (token_id, score)

    def matches(self, s: str, start: int):
        """Yield (token_id, end, score) for every token matching at `start`."""
        node = self.root
        j = start
        n = len(s)
        while j < n:
            node = node.children.get(s[j])
            if node is None:
                return
            j += 1
            if node.payload is not None:
                token_id, score = node.payload
                yield token_id, j, score


def _trie_for(vocab) -> Trie:
    trie = getattr(vocab, "_match_trie", None)
    if trie is None:
        trie = Trie(vocab.lattice_entries())
        vocab._match_trie = trie
    return trie


class _AlphaTables:
    """Per-boundary categorical tables for one alpha value."""

    __slots__ = ("starts", "cums", "edge_idx", "total_mass")

    def __init__(self, starts, cums, edge_idx, total_mass):
        self.starts = starts
        self.cums = cums
        self.edge_idx = edge_idx
        self.total_mass = total_mass


class Lattice:
    """All vocabulary matches over one normalized string.

    edges[k] = (start, end, token_id, score, piece); incoming[j] lists the
    indices of edges ending at boundary j.
    """

    def __init__(self, text: str, edges, incoming):
        self.text = text
        self.n = len(text)
        self.edges = edges
        self.incoming = incoming
        self._alpha_cache: dict[float, _AlphaTables] = {}

    def alpha_tables(self, alpha: float) -> _AlphaTables:
        tables = self._alpha_cache.get(alpha)
        if tables is None:
            tables = self._build_alpha_tables(alpha)
            self._alpha_cache[alpha] = tables
        return tables

    def _build_alpha_tables(self, alpha: float) -> _AlphaTables:
        n = self.n
        forward = np.full(n + 1, -np.inf)
        forward[0] = 0.0
        starts: list[np.ndarray | None] = [None] * (n + 1)
        cums: list[np.ndarray | None] = [None] * (n + 1)
        edge_idx: list[np.ndarray | None] = [None] * (n + 1)
        for j in range(1, n + 1):
            idxs = self.incoming[j]
            if not idxs:
                continue
            st = np.fromiter((self.edges[k][0] for k in idxs), dtype=np.int64)
            sc = np.fromiter((self.edges[k][3] for k in idxs), dtype=np.float64)
            w = forward[st] + (alpha * sc if alpha != 0.0 else 0.0)
            m = np.max(w)
            if m == -np.inf:
                continue
            mass = np.exp(w - m)
            cum = np.cumsum(mass)
            forward[j] = m + math.log(cum[-1])
            starts[j] = st
            cums[j] = cum
            edge_idx[j] = np.asarray(idxs, dtype=np.int64)
        total = forward[n] if n > 0 else 0.0
        return _AlphaTables(starts, cums, edge_idx, total)


def build_lattice(s: str, vocab) -> Lattice:
    """Match every vocabulary token against `s` and verify connectivity.

    Never-sampled special tokens contribute no edges.  Raises
    CoverageError when no path spans the string (typically a character
    absent from the vocabulary).
    """
    trie = _trie_for(vocab)
    n = len(s)
    edges: list[tuple[int, int, int, float, str]] = []
    incoming: list[list[int]] = [[] for _ in range(n + 1)]
    outgoing = [False] * n
    for i in range(n):
        for token_id, end, score in trie.matches(s, i):
            incoming[end].append(len(edges))
            edges.append((i, end, token_id, score, s[i:end]))
            outgoing[i] = True
    if n > 0:
        reach = [False] * (n + 1)
        reach[0] = True
        for j in range(1, n + 1):
            reach[j] = any(reach[edges[k][0]] for k in incoming[j])
        if not reach[n]:
            bad = sorted({s[i] for i in range(n) if not outgoing[i]})
            if bad:
                raise CoverageError(
                    f"characters {bad!r} match no vocabulary token in {s!r}"
                )
            raise CoverageError(f"no segmentation spans {s!r}")
    return Lattice(s, edges, incoming)


def _best_paths(lat: Lattice, n: int) -> list[tuple]:
    """Top-n path keys at the end boundary.

    A path key is (negated score, token count, pieces, ids); tuple order
    therefore ranks by higher score, then fewer tokens, then
    lexicographically smaller piece sequence.
    """
    empty: list[tuple] = []
    paths: list[list[tuple]] = [empty] * (lat.n + 1)
    paths[0] = [(0.0, 0, (), ())]
    for j in range(1, lat.n + 1):
        cand = []
        for k in lat.incoming[j]:
            start, _, token_id, score, piece = lat.edges[k]
            for neg, count, pieces, ids in paths[start]:
                cand.append((neg - score, count + 1, pieces + (piece,), ids + (token_id,)))
        cand.sort()
        paths[j] = cand[:n]
    return paths[lat.n]


def viterbi(lat: Lattice) -> Segmentation:
    """Highest-scoring segmentation; ties prefer fewer, then smaller pieces."""
    best = _best_paths(lat, 1)
    if not best:
        raise DisconnectedLattice(f"no path through lattice of {lat.text!r}")
    neg, _, pieces, ids = best[0]
    return Segmentation(ids, pieces, -neg)


def nbest(lat: Lattice, n: int) -> list[Segmentation]:
    """Up to `n` distinct best segmentations, in rank order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    top = _best_paths(lat, n)
    if not top and lat.n > 0:
        raise DisconnectedLattice(f"no path through lattice of {lat.text!r}")
    return [Segmentation(ids, pieces, -neg) for neg, _, pieces, ids in top]


def marginal_loglik(lat: Lattice) -> float:
    """Log of the summed probability of every path through the lattice."""
    f = [-math.inf] * (lat.n + 1)
    f[0] = 0.0
    for j in range(1, lat.n + 1):
        vals = [f[lat.edges[k][0]] + lat.edges[k][3] for k in lat.incoming[j]]
        if vals:
            m = max(vals)
            if m > -math.inf:
                f[j] = m + math.log(sum(math.exp(v - m) for v in vals))
    if lat.n > 0 and f[lat.n] == -math.inf:
        raise DisconnectedLattice(f"no path through lattice of {lat.text!r}")
    return f[lat.n] if lat.n > 0 else 0.0


def _pick(cum: np.ndarray, u: float) -> int:
    # First bin whose cumulative mass exceeds u * total, clamped for safety.
    target = u * cum[-1]
    idx = int(np.searchsorted(cum, target, side="right"))
    return min(idx, len(cum) - 1)


def sample(lat: Lattice, cfg: SamplerConfig, draw_index: int = 0) -> Segmentation:
    """Draw one path with probability proportional to exp(alpha * logprob).

    Deterministic in (lattice, cfg.seed, draw_index): the draw consumes its
    own derived stream, so batches can assign one index per item and get
    independent, reproducible draws.
    """
    if lat.n == 0:
        return Segmentation((), (), 0.0)
    tables = lat.alpha_tables(cfg.alpha)
    if tables.total_mass == -math.inf:
        raise DisconnectedLattice(f"no sampleable path through {lat.text!r}")
    key = stream_key(cfg.seed, draw_index)
    chosen: list[int] = []
    j = lat.n
    step = 0
    while j > 0:
        cum = tables.cums[j]
        if cum is None or cum[-1] <= 0.0:
            raise DisconnectedLattice(f"no sampleable path through {lat.text!r}")
        pick = _pick(cum, float_at(key, step))
        step += 1
        edge = int(tables.edge_idx[j][pick])
        chosen.append(edge)
        j = int(tables.starts[j][pick])
    chosen.reverse()
    ids = tuple(lat.edges[k][2] for k in chosen)
    pieces = tuple(lat.edges[k][4] for k in chosen)
    logprob = 0.0
    for k in chosen:
        logprob += lat.edges[k][3]
    return Segmentation(ids, pieces, logprob)


def sample_histogram(lat: Lattice, cfg: SamplerConfig, n_draws: int) -> Counter:
    """Piece-sequence counts over draws 0..n_draws-1 of `sample`.

    Vectorized but draw-for-draw identical to calling `sample` with each
    index, which makes it cheap to inspect a sampling distribution.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    if lat.n == 0:
        return Counter({(): n_draws})
    tables = lat.alpha_tables(cfg.alpha)
    if tables.total_mass == -math.inf:
        raise DisconnectedLattice(f"no sampleable path through {lat.text!r}")
    keys = stream_keys_np(cfg.seed, n_draws)
    pos = np.full(n_draws, lat.n, dtype=np.int64)
    trail: list[np.ndarray] = []
    step = 0
    while np.any(pos > 0):
        u = floats_at_np(keys, step)
        step += 1
        nxt = pos.copy()
        for j in np.unique(pos):
            j = int(j)
            if j == 0:
                continue
            mask = pos == j
            cum = tables.cums[j]
            target = u[mask] * cum[-1]
            idx = np.searchsorted(cum, target, side="right")
            idx = np.minimum(idx, len(cum) - 1)
            nxt[mask] = tables.starts[j][idx]
        pos = nxt
        trail.append(pos.copy())
    rows = np.stack(trail, axis=1)
    uniq, counts = np.unique(rows, axis=0, return_counts=True)
    piece_of = {(lat.edges[k][0], lat.edges[k][1]): lat.edges[k][4] for k in range(len(lat.edges))}
    out: Counter = Counter()
    for row, count in zip(uniq, counts):
        pieces: list[str] = []
        prev = lat.n
        for v in row:
            v = int(v)
            pieces.append(piece_of[(v, prev)])
            prev = v
            if v == 0:
                break
        pieces.reverse()
        out[tuple(pieces)] += int(count)
    return out


def encode(
    s: str,
    vocab,
    mode: str = "viterbi",
    cfg: SamplerConfig | None = None,
    draw_index: int = 0,
) -> Segmentation:
    """Normalize a raw string and segment it under `vocab`."""
    text = normalize_text(s, getattr(vocab, "marker", DEFAULT_MARKER))
    lat = build_lattice(text, vocab)
    if mode == "viterbi":
        return viterbi(lat)
    if mode == "sample":
        return sample(lat, cfg if cfg is not None else SamplerConfig(), draw_index)
    raise ValueError(f"unknown mode {mode!r}")


def decode(token_ids, vocab) -> str:
    """Map ids back to pieces and restore whitespace."""
    pieces = []
    for token_id in token_ids:
        piece = vocab.token_of(token_id)
        if piece is None:
            raise UnknownTokenId(f"id {token_id} not in vocabulary")
        pieces.append(piece)
    return denormalize(pieces, getattr(vocab, "marker", DEFAULT_MARKER))
