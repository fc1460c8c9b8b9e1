from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from tatok import (
    ConfigError,
    DuplicateToken,
    MergeConfig,
    MergedVocab,
    OriginalVocab,
    ScoredVocab,
    ZeroLength,
    assign_score,
    default_big_score,
    merge,
)
from tatok.merge import translate_token, untranslate_token
from tatok.rng import StreamRng

M = "▁"


def make_task(entries=None) -> ScoredVocab:
    if entries is None:
        entries = [
            (f"{M}mental{M}health", math.log(0.4)),
            (f"{M}the", math.log(0.3)),
            ("a", math.log(0.2)),
            ("b", math.log(0.1)),
        ]
    return ScoredVocab(entries)


class TestAssignScore:
    def test_length_one(self):
        assert assign_score("x", 10.0) == -20.0

    def test_length_four(self):
        assert assign_score("abcd", 10.0) == -12.5

    def test_longer_tokens_score_higher(self):
        assert assign_score("abcdefghij", 10.0) > assign_score("ab", 10.0)

    def test_zero_length(self):
        with pytest.raises(ZeroLength):
            assign_score("", 10.0)

    @given(st.integers(min_value=1, max_value=200), st.floats(min_value=0.01, max_value=1e6))
    def test_always_below_negative_big(self, length, big):
        assert assign_score("x" * length, big) < -big


class TestDefaultBigScore:
    def test_max_magnitude(self):
        task = make_task([("x", -2.1), ("y", -9.2), ("z", -5.0)])
        assert default_big_score(task) == 9.2

    def test_degenerate_zero_score_rejected_at_merge(self):
        task = make_task([("x", -0.0)])
        orig = OriginalVocab(["x", "q"])
        assert default_big_score(task) == 0.0
        with pytest.raises(ConfigError):
            merge(orig, task, MergeConfig())

    def test_boundary_arithmetic(self):
        # With b = 9.2 even a very long token stays strictly below -b.
        assert assign_score("x" * 100, 9.2) == pytest.approx(-9.292)
        assert assign_score("x" * 100, 9.2) < -9.2


class TestMerge:
    def test_id_preservation_and_appending(self):
        orig = OriginalVocab(["<s>", "foo", "bar", "baz"], special_tokens={"<s>"})
        task = make_task([("new1", -1.0), ("new2", -2.0)])
        merged = merge(orig, task, MergeConfig())
        assert len(merged) == 6
        assert [e.token for e in merged.entries[:4]] == ["<s>", "foo", "bar", "baz"]
        assert merged.entries[2].token == "bar"
        assert [e.id for e in merged.entries if e.origin == "task"] == [4, 5]

    def test_task_only_token_keeps_trained_score(self):
        orig = OriginalVocab(["foo"])
        task = make_task()
        merged = merge(orig, task, MergeConfig())
        entry = merged.entries[merged.id_of(f"{M}mental{M}health")]
        assert entry.origin == "task"
        assert entry.score == math.log(0.4)

    def test_rule2_scores_below_all_task_scores(self):
        orig = OriginalVocab(["the", "longertoken", "q"])
        task = make_task()
        merged = merge(orig, task, MergeConfig())
        min_task = min(s for _, s in task.entries)
        for e in merged.entries:
            if e.origin == "original" and not e.never_sample:
                assert e.score < min_task

    def test_rule2_longer_tokens_outrank_shorter(self):
        orig = OriginalVocab(["q", "qq", "qqqq", "qqqqqqqq"])
        merged = merge(orig, make_task(), MergeConfig())
        rule2 = [e.score for e in merged.entries[:4]]
        assert rule2 == sorted(rule2)  # listed short to long above

    def test_overlap_keeps_original_id_and_task_score(self):
        orig = OriginalVocab(["foo", f"{M}the", "bar"])
        task = make_task()
        merged = merge(orig, task, MergeConfig())
        entry = merged.entries[1]
        assert entry.token == f"{M}the"
        assert entry.origin == "overlap"
        assert entry.id == 1
        assert entry.score == math.log(0.3)
        # Not appended a second time.
        assert sum(1 for e in merged.entries if e.token == f"{M}the") == 1

    def test_specials_never_sampled(self):
        orig = OriginalVocab(["<pad>", "x"], special_tokens={"<pad>"})
        merged = merge(orig, make_task(), MergeConfig())
        assert merged.entries[0].never_sample
        assert all(e.token != "<pad>" for _, e in enumerate(merged.entries) if not e.never_sample)
        assert all(tid != 0 for tid, _, _ in merged.lattice_entries())

    def test_explicit_big_score_too_small(self):
        orig = OriginalVocab(["x"])
        task = make_task([("t", -8.0), ("u", -1.0)])
        with pytest.raises(ConfigError):
            merge(orig, task, MergeConfig(big_score=7.9))

    def test_duplicate_original_tokens(self):
        with pytest.raises(DuplicateToken):
            OriginalVocab(["x", "x"])

    def test_verify_order_constraint_numerically(self):
        # len-3 token at b=9.2 lands near -12.27, below the -9.2 floor.
        assert assign_score("the", 9.2) == pytest.approx(-9.2 * 4 / 3)
        assert assign_score("the", 9.2) < -9.2

    def test_idempotent_on_functional_fields(self):
        orig = OriginalVocab(["<s>", "foo", f"{M}the"], special_tokens={"<s>"})
        task = make_task()
        cfg = MergeConfig()
        first = merge(orig, task, cfg)
        second = merge(OriginalVocab.from_merged(first), task, MergeConfig(big_score=first.big_score))
        assert [(e.id, e.token, e.score, e.never_sample) for e in first.entries] == [
            (e.id, e.token, e.score, e.never_sample) for e in second.entries
        ]

    def test_keep_original_scores_flag(self):
        orig = OriginalVocab(["x", "y"], scores=[-3.0, -4.0])
        task = make_task([("t", -2.0)])
        kept = merge(orig, task, MergeConfig(big_score=4.0, keep_original_scores=True))
        assert kept.entries[0].score == -3.0
        overwritten = merge(orig, task, MergeConfig(big_score=4.0))
        assert overwritten.entries[0].score == assign_score("x", 4.0)


class TestMarkerTranslation:
    def test_byte_convention(self):
        assert translate_token("Ġthe", "byte") == f"{M}the"
        assert translate_token("ing", "byte") == "ing"
        assert untranslate_token(f"{M}the", "byte") == "Ġthe"

    def test_wordpiece_convention(self):
        assert translate_token("the", "wordpiece") == f"{M}the"
        assert translate_token("##ing", "wordpiece") == "ing"
        assert untranslate_token(f"{M}the", "wordpiece") == "the"
        assert untranslate_token("ing", "wordpiece") == "##ing"

    def test_metaspace_with_other_marker(self):
        assert translate_token("_the", "metaspace", source_marker="_") == f"{M}the"

    def test_specials_pass_verbatim_in_merge(self):
        orig = OriginalVocab(["[CLS]", "the"], special_tokens={"[CLS]"})
        merged = merge(orig, make_task(), MergeConfig(marker_translation="wordpiece"))
        assert merged.entries[0].token == "[CLS]"
        assert merged.entries[1].token == f"{M}the"

    def test_overlap_found_after_translation(self):
        orig = OriginalVocab(["the"])  # wordpiece word-start form
        merged = merge(orig, make_task(), MergeConfig(marker_translation="wordpiece"))
        assert merged.entries[0].origin == "overlap"


class TestOriginalImporters:
    def test_token_lines(self, tmp_path):
        path = tmp_path / "orig.txt"
        path.write_text("<pad>\nfoo\nbar\n\n", encoding="utf-8")
        orig = OriginalVocab.from_token_lines(path, {"<pad>"})
        assert orig.tokens == ["<pad>", "foo", "bar"]
        assert not orig.has_scores

    def test_tsv_with_scores(self, tmp_path):
        path = tmp_path / "orig.tsv"
        path.write_text("# marker _\nfoo\t-1.5\n#tag\t-2.0\n", encoding="utf-8")
        orig = OriginalVocab.from_tsv(path)
        assert orig.tokens == ["foo", "#tag"]
        assert orig.scores == [-1.5, -2.0]

    def test_json_map(self, tmp_path):
        path = tmp_path / "orig.json"
        path.write_text('{"b": 1, "a": 0, "c": 2}', encoding="utf-8")
        orig = OriginalVocab.from_json_map(path)
        assert orig.tokens == ["a", "b", "c"]

    def test_json_map_rejects_sparse_ids(self, tmp_path):
        path = tmp_path / "orig.json"
        path.write_text('{"a": 0, "b": 5}', encoding="utf-8")
        with pytest.raises(ConfigError):
            OriginalVocab.from_json_map(path)

    def test_from_merged_round_trip(self):
        orig = OriginalVocab(["<s>", "foo"], special_tokens={"<s>"})
        merged = merge(orig, make_task(), MergeConfig())
        back = OriginalVocab.from_merged(merged)
        assert back.tokens == [e.token for e in merged.entries]
        assert back.special_tokens == {"<s>"}
        assert back.has_scores


class TestMergedVocabIO:
    def test_json_round_trip(self, tmp_path):
        orig = OriginalVocab(["<s>", "foo"], special_tokens={"<s>"})
        merged = merge(orig, make_task(), MergeConfig())
        path = tmp_path / "merged.json"
        merged.save_json(path)
        loaded = MergedVocab.load_json(path)
        assert loaded.entries == merged.entries
        assert loaded.original_size == merged.original_size
        assert loaded.marker == merged.marker
        assert loaded.big_score == merged.big_score

    def test_byte_identical_rewrites(self, tmp_path):
        orig = OriginalVocab(["foo", "bar"])
        merged = merge(orig, make_task(), MergeConfig())
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        merged.save_json(a)
        merged.save_json(b)
        assert a.read_bytes() == b.read_bytes()


class TestRandomizedProtocol:
    def test_invariants_over_random_pairs(self):
        rng = StreamRng.from_seed(55)
        for _ in range(30):
            n_orig = 3 + rng.next_below(20)
            orig_tokens = []
            while len(orig_tokens) < n_orig:
                tok = "".join(rng.choice("abcdef") for _ in range(1 + rng.next_below(6)))
                if tok not in orig_tokens:
                    orig_tokens.append(tok)
            specials = {orig_tokens[0]} if rng.next_float() < 0.5 else set()
            orig = OriginalVocab(orig_tokens, specials)

            n_task = 2 + rng.next_below(10)
            tokens = []
            while len(tokens) < n_task:
                tok = "".join(rng.choice("abcdxyz") for _ in range(1 + rng.next_below(5)))
                if tok not in tokens:
                    tokens.append(tok)
            weights = [0.05 + rng.next_float() for _ in tokens]
            total = sum(weights)
            task = ScoredVocab(
                sorted(((t, math.log(w / total)) for t, w in zip(tokens, weights)),
                       key=lambda e: (-e[1], e[0]))
            )

            merged = merge(orig, task, MergeConfig())
            # Id stability.
            for i, tok in enumerate(orig_tokens):
                assert merged.entries[i].token == tok
            min_task = min(s for _, s in task.entries)
            lengths_scores = []
            for e in merged.entries:
                if e.origin == "original" and not e.never_sample:
                    assert e.score < min_task
                    lengths_scores.append((len(e.token), e.score))
                if e.origin == "task":
                    assert e.id >= merged.original_size
            # Length monotonicity among formula-scored tokens.
            lengths_scores.sort()
            for (l1, s1), (l2, s2) in zip(lengths_scores, lengths_scores[1:]):
                if l1 < l2:
                    assert s1 < s2
