from __future__ import annotations

import math

import numpy as np
import pytest

from tatok import (
    DimensionMismatch,
    EmbeddingMatrix,
    MappingPlan,
    MergeConfig,
    OriginalVocab,
    PlanGap,
    PlanItem,
    ScoredVocab,
    SegmentationFailure,
    extend_matrix,
    merge,
    plan_mapping,
)
from tatok.embedding import greedy_segmenter

M = "▁"


def small_merged():
    orig = OriginalVocab(["<s>", f"{M}ab", f"{M}a", "b", "a"], special_tokens={"<s>"})
    task = ScoredVocab(
        [(f"{M}ab", math.log(0.5)), (f"{M}aab", math.log(0.3)), ("ba", math.log(0.2))]
    )
    return merge(orig, task, MergeConfig())


class TestPlanMapping:
    def test_one_item_per_task_token(self):
        merged = small_merged()
        plan = plan_mapping(merged)
        task_ids = [e.id for e in merged.entries if e.origin == "task"]
        assert [it.new_id for it in plan.items] == task_ids

    def test_overlap_tokens_excluded(self):
        merged = small_merged()
        plan = plan_mapping(merged)
        overlap_id = merged.id_of(f"{M}ab")
        assert overlap_id < merged.original_size
        assert all(it.new_id != overlap_id for it in plan.items)

    def test_greedy_longest_match_sources(self):
        merged = small_merged()
        plan = plan_mapping(merged)
        by_token = {it.token: it.source_ids for it in plan.items}
        # ▁aab → [▁a][a][b] under longest-match over original tokens.
        assert by_token[f"{M}aab"] == (2, 4, 3)
        assert by_token["ba"] == (3, 4)

    def test_custom_segmenter_recorded_directly(self):
        merged = small_merged()
        plan = plan_mapping(merged, lambda s: [1, 3])
        assert all(it.source_ids == (1, 3) for it in plan.items)

    def test_empty_segmentation_rejected(self):
        merged = small_merged()
        with pytest.raises(SegmentationFailure):
            plan_mapping(merged, lambda s: [])

    def test_non_original_ids_rejected(self):
        merged = small_merged()
        with pytest.raises(SegmentationFailure):
            plan_mapping(merged, lambda s: [merged.original_size])

    def test_greedy_failure_when_uncoverable(self):
        orig = OriginalVocab(["x"])
        task = ScoredVocab([("qq", math.log(0.6)), ("q", math.log(0.4))])
        merged = merge(orig, task, MergeConfig())
        seg = greedy_segmenter(merged)
        with pytest.raises(SegmentationFailure):
            seg("qq")

    def test_callback_receives_original_convention(self):
        # Under wordpiece translation the callback sees "word"/"##frag"
        # forms, not this toolkit's marker forms.
        orig = OriginalVocab(["the", "##re"])
        task = ScoredVocab([(f"{M}there", math.log(0.6)), (f"{M}the", math.log(0.4))])
        merged = merge(orig, task, MergeConfig(marker_translation="wordpiece"))
        seen: list[str] = []

        def segmenter(surface: str) -> list[int]:
            seen.append(surface)
            return [0, 1]

        plan = plan_mapping(merged, segmenter)
        assert seen == ["there"]  # ▁there untranslated; ▁the overlaps, excluded
        assert plan.items[0].source_ids == (0, 1)


class TestExtendMatrix:
    def test_mean_of_two_rows(self):
        mat = EmbeddingMatrix(np.arange(20, dtype=np.float32).reshape(10, 2))
        mat.data[5] = [1.0, 3.0]
        mat.data[9] = [3.0, 5.0]
        plan = MappingPlan([PlanItem(10, "t", (5, 9))])
        out = extend_matrix(mat, plan, 11)
        assert out.data[10].tolist() == [2.0, 4.0]

    def test_singleton_source_bit_equal(self):
        rng = np.random.default_rng(3)
        mat = EmbeddingMatrix(rng.normal(size=(6, 8)).astype(np.float32))
        plan = MappingPlan([PlanItem(6, "t", (4,))])
        out = extend_matrix(mat, plan, 7)
        assert np.array_equal(
            out.data[6].view(np.uint32), mat.data[4].view(np.uint32)
        )

    def test_three_source_hand_mean(self):
        mat = EmbeddingMatrix(np.array([[1, 0], [0, 1], [2, 2]], dtype=np.float32))
        plan = MappingPlan([PlanItem(3, "t", (0, 1, 2))])
        out = extend_matrix(mat, plan, 4)
        assert out.data[3].tolist() == [1.0, 1.0]

    def test_original_rows_bit_exact(self):
        rng = np.random.default_rng(8)
        mat = EmbeddingMatrix(rng.normal(size=(20, 16)).astype(np.float32))
        plan = MappingPlan([PlanItem(20, "t", (1, 2, 3))])
        out = extend_matrix(mat, plan, 21)
        assert np.array_equal(
            out.data[:20].view(np.uint32), mat.data.view(np.uint32)
        )

    def test_float64_accumulation_within_one_ulp(self):
        rng = np.random.default_rng(11)
        mat = EmbeddingMatrix(rng.normal(size=(50, 32)).astype(np.float32))
        sources = tuple(range(50))
        plan = MappingPlan([PlanItem(50, "t", sources)])
        out = extend_matrix(mat, plan, 51)
        oracle = (mat.data.astype(np.float64).sum(axis=0) / 50.0).astype(np.float32)
        got = out.data[50]
        ulp = np.spacing(np.abs(oracle).astype(np.float32))
        assert np.all(np.abs(got - oracle) <= ulp)

    def test_norm_bound(self):
        rng = np.random.default_rng(13)
        mat = EmbeddingMatrix(rng.normal(size=(9, 4)).astype(np.float32))
        plan = MappingPlan([PlanItem(9, "t", (0, 3, 7))])
        out = extend_matrix(mat, plan, 10)
        new_norm = np.linalg.norm(out.data[9])
        max_src = max(np.linalg.norm(mat.data[i]) for i in (0, 3, 7))
        assert new_norm <= max_src + 1e-6

    def test_plan_gap(self):
        mat = EmbeddingMatrix(np.zeros((4, 2), dtype=np.float32))
        with pytest.raises(PlanGap):
            extend_matrix(mat, MappingPlan([PlanItem(4, "t", (0,))]), 6)

    def test_duplicate_plan_item(self):
        mat = EmbeddingMatrix(np.zeros((4, 2), dtype=np.float32))
        plan = MappingPlan([PlanItem(4, "t", (0,)), PlanItem(4, "u", (1,))])
        with pytest.raises(PlanGap):
            extend_matrix(mat, plan, 5)

    def test_bad_source_row(self):
        mat = EmbeddingMatrix(np.zeros((4, 2), dtype=np.float32))
        with pytest.raises(DimensionMismatch):
            extend_matrix(mat, MappingPlan([PlanItem(4, "t", (9,))]), 5)

    def test_shrinking_rejected(self):
        mat = EmbeddingMatrix(np.zeros((4, 2), dtype=np.float32))
        with pytest.raises(DimensionMismatch):
            extend_matrix(mat, MappingPlan([]), 3)


class TestMatrixIO:
    def test_binary_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(17)
        mat = EmbeddingMatrix(rng.normal(size=(7, 5)).astype(np.float32))
        path = tmp_path / "m.tate"
        mat.save_binary(path)
        blob = path.read_bytes()
        assert blob[:4] == b"TATE"
        assert int.from_bytes(blob[4:8], "little") == 7
        assert int.from_bytes(blob[8:12], "little") == 5
        loaded = EmbeddingMatrix.load_binary(path)
        assert np.array_equal(loaded.data.view(np.uint32), mat.data.view(np.uint32))

    def test_text_round_trip(self, tmp_path):
        rng = np.random.default_rng(19)
        mat = EmbeddingMatrix(rng.normal(size=(3, 4)).astype(np.float32))
        path = tmp_path / "m.txt"
        mat.save_text(path)
        loaded = EmbeddingMatrix.load_text(path)
        assert np.array_equal(loaded.data.view(np.uint32), mat.data.view(np.uint32))

    def test_truncated_binary_rejected(self, tmp_path):
        path = tmp_path / "bad.tate"
        path.write_bytes(b"TATE" + (3).to_bytes(4, "little") + (2).to_bytes(4, "little") + b"\x00" * 4)
        with pytest.raises(DimensionMismatch):
            EmbeddingMatrix.load_binary(path)

    def test_plan_json_round_trip(self, tmp_path):
        plan = MappingPlan([PlanItem(10, f"{M}ab", (1, 2)), PlanItem(11, "c", (0,))])
        path = tmp_path / "plan.json"
        plan.save_json(path)
        assert MappingPlan.load_json(path).items == plan.items
