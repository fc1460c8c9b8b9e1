#!/usr/bin/env python3
"""Train a variable-granularity vocabulary on a phrase-heavy corpus.

Walks the full construction path: normalize raw sentences, extract the
candidate piece pool, fit scores with EM, and prune down to the target
size.  Because pieces may cross word boundaries, the surviving entries
range from single characters to whole phrases.
"""

from tatok import TrainConfig, extract_seed, ingest_lines, train
from tatok.metrics import format_buckets, length_bucket_table
from tatok.synth import generate_corpus
from tatok.trainer import RoundLog

# A deterministic corpus with heavy phrase reuse; swap in your own file
# via tatok.ingest(path) for real data.
sentences = generate_corpus(n_sentences=200, seed=7)
print("corpus sample:")
for line in sentences[:3]:
    print("   ", line)

corpus = ingest_lines(sentences)
print(f"\n{len(corpus)} sentences, {len(corpus.charset)} distinct characters")

# The seed pool: frequent substrings of any length up to the cap, plus
# every character so that any sentence stays segmentable.
seed = extract_seed(corpus, max_piece_len=12, seed_size=2000)
print(f"seed pool: {len(seed)} candidate pieces")

log: list[RoundLog] = []
vocab = train(seed, corpus, TrainConfig(target_size=400), log)

print("\nlikelihood per round (within a round EM never decreases):")
for record in log:
    shown = ", ".join(f"{v:.1f}" for v in record.logliks)
    print(f"   round {record.round_index}: size {record.size:5d}  loglik [{shown}]")

print(f"\nfinal vocabulary: {len(vocab)} entries; 15 best by score:")
for token, score in vocab.entries[:15]:
    print(f"   {score:9.4f}  {token!r}")

print("\ntop tokens per length interval:")
print(format_buckets(length_bucket_table(vocab, k=3)))

vocab.save_tsv("demo-vocab.tsv")
print("\nwrote demo-vocab.tsv")
