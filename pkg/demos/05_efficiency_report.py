#!/usr/bin/env python3
"""Measure what the merged vocabulary buys: fewer, longer tokens.

Compares Viterbi encoding under the merged table against a
single-character baseline, then breaks down how much generated length
comes from task-only, overlapping, and original-only tokens.
"""

from tatok import (
    MergeConfig,
    OriginalVocab,
    TrainConfig,
    build_lattice,
    constitution,
    efficiency,
    extract_seed,
    ingest_lines,
    merge,
    train,
    viterbi,
)
from tatok.metrics import format_constitution, format_efficiency
from tatok.synth import char_vocab, generate_corpus, generate_original_tokens

corpus = ingest_lines(generate_corpus(n_sentences=200, seed=7))
seed = extract_seed(corpus, max_piece_len=12, seed_size=2000)
task = train(seed, corpus, TrainConfig(target_size=400))
tokens, specials = generate_original_tokens(seed=11, size=600)
merged = merge(OriginalVocab(tokens, specials), task, MergeConfig())

print("character baseline:")
base_report = efficiency(corpus, char_vocab(corpus), timing_runs=3)
print(format_efficiency(base_report))

print("\nmerged vocabulary:")
merged_report = efficiency(corpus, merged, timing_runs=3)
print(format_efficiency(merged_report))

ratio = merged_report.len_per_tok / base_report.len_per_tok
print(f"\nlength-per-token improvement: {ratio:.2f}x "
      f"({base_report.n_tok:.1f} -> {merged_report.n_tok:.1f} tokens per sentence)")

segs = [viterbi(build_lattice(s.text, merged)) for s in corpus.sentences]
print("\nwhere the length comes from (share of characters):")
print(format_constitution(constitution(segs, merged)))
