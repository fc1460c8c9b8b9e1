#!/usr/bin/env python3
"""Initialize embedding rows for tokens the pre-trained model never saw.

Each appended token is segmented into original-vocabulary subwords (here
with the built-in longest-match fallback) and its new row starts as the
mean of those subword rows, so training begins from something meaningful
instead of noise.
"""

import numpy as np

from tatok import (
    EmbeddingMatrix,
    MergeConfig,
    OriginalVocab,
    TrainConfig,
    extend_matrix,
    extract_seed,
    ingest_lines,
    merge,
    plan_mapping,
    train,
)
from tatok.synth import generate_corpus, generate_original_tokens

corpus = ingest_lines(generate_corpus(n_sentences=200, seed=7))
seed = extract_seed(corpus, max_piece_len=12, seed_size=2000)
task = train(seed, corpus, TrainConfig(target_size=400))
tokens, specials = generate_original_tokens(seed=11, size=600)
merged = merge(OriginalVocab(tokens, specials), task, MergeConfig())

# Stand-in for a model checkpoint: one float32 row per original token.
rng = np.random.default_rng(0)
matrix = EmbeddingMatrix(rng.normal(size=(merged.original_size, 16)).astype(np.float32))
print(f"original matrix: {matrix.rows} rows x {matrix.dim} dims")

plan = plan_mapping(merged)
print(f"mapping plan covers {len(plan.items)} appended tokens; first three:")
for item in plan.items[:3]:
    subwords = [merged.token_of(s) for s in item.source_ids]
    print(f"   id {item.new_id}  {item.token!r} <- {subwords}")

extended = extend_matrix(matrix, plan, len(merged))
print(f"\nextended matrix: {extended.rows} rows x {extended.dim} dims")

# The original block is untouched, bit for bit.
same = np.array_equal(
    extended.data[: matrix.rows].view(np.uint32), matrix.data.view(np.uint32)
)
print(f"original rows preserved bit-exact: {same}")

item = plan.items[0]
oracle = matrix.data[list(item.source_ids)].astype(np.float64).mean(axis=0)
print(f"first new row equals the mean of its sources: "
      f"{np.allclose(extended.data[item.new_id], oracle)}")

extended.save_binary("demo-embeddings.tate")
plan.save_json("demo-plan.json")
print("\nwrote demo-embeddings.tate and demo-plan.json")
