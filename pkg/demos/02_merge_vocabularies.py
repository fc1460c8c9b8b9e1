#!/usr/bin/env python3
"""Merge a trained task vocabulary into a pre-trained token list.

The merged table keeps every original id (so embedding row k still
belongs to token k), appends task-only tokens at the end, and gives
score-less original tokens a rank below every task token via
-big_score * (len+1)/len.
"""

from collections import Counter

from tatok import MergeConfig, OriginalVocab, TrainConfig, extract_seed, ingest_lines, merge, train
from tatok.synth import generate_corpus, generate_original_tokens

corpus = ingest_lines(generate_corpus(n_sentences=200, seed=7))
seed = extract_seed(corpus, max_piece_len=12, seed_size=2000)
task = train(seed, corpus, TrainConfig(target_size=400))

# A synthetic stand-in for a pre-trained vocabulary: specials, letters,
# and generic subword fragments, none of which carry scores.
tokens, specials = generate_original_tokens(seed=11, size=600)
original = OriginalVocab(tokens, specials)
print(f"original vocabulary: {len(original)} tokens, specials: {specials}")

merged = merge(original, task, MergeConfig())
print(f"merged vocabulary:   {len(merged)} tokens "
      f"(+{len(merged) - merged.original_size} new ids)")
print(f"derived big_score:   {merged.big_score:.4f}")

counts = Counter(e.origin for e in merged.entries)
print(f"provenance: {counts['original']} original-only, "
      f"{counts['overlap']} overlapping, {counts['task']} task-only")

print("\nid stability: first five ids keep their original tokens")
for e in merged.entries[:5]:
    flag = " (special, never sampled)" if e.never_sample else ""
    print(f"   id {e.id}: {e.token!r}  score {e.score:.3f}{flag}")

print("\nscore ordering: any task token outranks every formula-scored original")
min_task = min(e.score for e in merged.entries if e.origin in ("task", "overlap"))
max_rule2 = max(
    e.score for e in merged.entries if e.origin == "original" and not e.never_sample
)
print(f"   lowest task score   {min_task:.4f}")
print(f"   highest Rule-2 score {max_rule2:.4f}  (strictly below)")

merged.save_json("demo-merged.json")
print("\nwrote demo-merged.json")
