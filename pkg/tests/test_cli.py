from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from tatok import EmbeddingMatrix, MergedVocab, ScoredVocab
from tatok.cli import main
from tatok.synth import generate_corpus, generate_original_tokens, write_corpus


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A trained corpus/vocab/merged/matrix set shared by CLI tests."""
    root = tmp_path_factory.mktemp("cliwork")
    corpus = root / "corpus.txt"
    write_corpus(corpus, generate_corpus(60, seed=5))
    original = root / "original.txt"
    tokens, specials = generate_original_tokens(seed=6, size=200)
    original.write_text("\n".join(tokens) + "\n", encoding="utf-8")

    vocab = root / "vocab.tsv"
    rc = main(
        [
            "train", "--corpus", str(corpus), "--target-size", "120",
            "--seed-size", "400", "--max-piece-len", "10", "--out", str(vocab),
        ]
    )
    assert rc == 0
    merged = root / "merged.json"
    rc = main(
        [
            "merge", "--task", str(vocab), "--original", str(original),
            "--special", "<pad>", "--special", "<unk>", "--special", "<s>",
            "--special", "</s>", "--out", str(merged),
        ]
    )
    assert rc == 0
    return {
        "root": root,
        "corpus": corpus,
        "original": original,
        "vocab": vocab,
        "merged": merged,
        "specials": specials,
    }


def run_lines(argv, stdin_text, capsys, monkeypatch):
    import io
    import sys

    monkeypatch.setattr(sys, "stdin", io.StringIO(stdin_text))
    rc = main(argv)
    out = capsys.readouterr().out
    return rc, out


class TestTrain:
    def test_vocab_file_has_target_size(self, workdir):
        vocab = ScoredVocab.load_tsv(workdir["vocab"])
        assert len(vocab) == 120

    def test_rerun_byte_identical(self, workdir, tmp_path):
        out2 = tmp_path / "vocab2.tsv"
        rc = main(
            [
                "train", "--corpus", str(workdir["corpus"]), "--target-size", "120",
                "--seed-size", "400", "--max-piece-len", "10", "--out", str(out2),
            ]
        )
        assert rc == 0
        assert out2.read_bytes() == Path(workdir["vocab"]).read_bytes()

    def test_log_monotone_within_rounds(self, workdir):
        log_path = Path(str(workdir["vocab"]) + ".log")
        rows = [json.loads(ln) for ln in log_path.read_text().splitlines()]
        assert rows
        for row in rows:
            lls = row["logliks"]
            for a, b in zip(lls, lls[1:]):
                assert b >= a - 1e-6 * abs(a)

    def test_usage_error_exit_code(self):
        assert main(["train", "--target-size", "not-a-number"]) == 1

    def test_data_error_exit_code(self, tmp_path):
        assert main(["train", "--corpus", str(tmp_path / "missing.txt")]) == 2


class TestMerge:
    def test_merged_document_shape(self, workdir):
        doc = json.loads(Path(workdir["merged"]).read_text(encoding="utf-8"))
        assert set(doc) >= {"version", "marker", "big_score", "original_size", "entries"}
        merged = MergedVocab.load_json(workdir["merged"])
        assert merged.original_size == 200
        assert len(merged) > 200

    def test_json_summary(self, workdir, tmp_path, capsys):
        out = tmp_path / "m.json"
        rc = main(
            [
                "merge", "--task", str(workdir["vocab"]), "--original",
                str(workdir["original"]), "--special", "<pad>", "--out", str(out),
                "--json",
            ]
        )
        assert rc == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["ok"] is True
        assert summary["increment"] == summary["size"] - summary["original_size"]


class TestEncodeDecode:
    def test_round_trip_through_cli(self, workdir, capsys, monkeypatch):
        text = "one step at a time\nbe kind to yourself\n"
        rc, encoded = run_lines(
            ["encode", "--vocab", str(workdir["merged"])], text, capsys, monkeypatch
        )
        assert rc == 0
        rc, decoded = run_lines(
            ["decode", "--vocab", str(workdir["merged"])], encoded, capsys, monkeypatch
        )
        assert rc == 0
        assert decoded == text

    def test_pieces_flag(self, workdir, capsys, monkeypatch):
        rc, out = run_lines(
            ["encode", "--vocab", str(workdir["merged"]), "--pieces"],
            "take a deep breath\n", capsys, monkeypatch,
        )
        assert rc == 0
        assert "▁" in out

    def test_sample_same_seed_identical(self, workdir, capsys, monkeypatch):
        text = "notice how you feel today\n" * 3
        argv = ["sample", "--vocab", str(workdir["merged"]), "--alpha", "0.5", "--seed", "11"]
        rc1, out1 = run_lines(argv, text, capsys, monkeypatch)
        rc2, out2 = run_lines(argv, text, capsys, monkeypatch)
        assert rc1 == rc2 == 0
        assert out1 == out2

    def test_sample_seeds_differ_but_decode_agrees(self, workdir, capsys, monkeypatch):
        text = "give yourself credit\n"
        _, a = run_lines(
            ["sample", "--vocab", str(workdir["merged"]), "--seed", "1"],
            text, capsys, monkeypatch,
        )
        _, b = run_lines(
            ["sample", "--vocab", str(workdir["merged"]), "--seed", "2"],
            text, capsys, monkeypatch,
        )
        _, da = run_lines(["decode", "--vocab", str(workdir["merged"])], a, capsys, monkeypatch)
        _, db = run_lines(["decode", "--vocab", str(workdir["merged"])], b, capsys, monkeypatch)
        assert da == db == text

    def test_draw_offset_aligns_streams(self, workdir, capsys, monkeypatch):
        lines = "hold on to hope\nstart where you are\n"
        _, joint = run_lines(
            ["sample", "--vocab", str(workdir["merged"]), "--seed", "3"],
            lines, capsys, monkeypatch,
        )
        _, second_only = run_lines(
            ["sample", "--vocab", str(workdir["merged"]), "--seed", "3",
             "--draw-offset", "1"],
            "start where you are\n", capsys, monkeypatch,
        )
        assert joint.splitlines()[1] == second_only.splitlines()[0]

    def test_unk_passthrough(self, workdir, capsys, monkeypatch):
        merged = MergedVocab.load_json(workdir["merged"])
        unk_id = merged.id_of("<unk>")
        rc, out = run_lines(
            ["encode", "--vocab", str(workdir["merged"]),
             "--unk-passthrough", str(unk_id)],
            "hope Ω hope\n", capsys, monkeypatch,
        )
        assert rc == 0
        ids = out.split()
        assert str(unk_id) in ids

    def test_uncovered_without_passthrough_fails(self, workdir, capsys, monkeypatch):
        rc, _ = run_lines(
            ["encode", "--vocab", str(workdir["merged"])],
            "hope Ω hope\n", capsys, monkeypatch,
        )
        assert rc == 2


class TestMapEmbed:
    def test_plan_and_matrix(self, workdir, tmp_path):
        merged = MergedVocab.load_json(workdir["merged"])
        rng = np.random.default_rng(42)
        mat = EmbeddingMatrix(
            rng.normal(size=(merged.original_size, 8)).astype(np.float32)
        )
        mat_path = tmp_path / "orig.tate"
        mat.save_binary(mat_path)
        out_matrix = tmp_path / "extended.tate"
        out_plan = tmp_path / "plan.json"
        rc = main(
            [
                "map-embed", "--merged", str(workdir["merged"]),
                "--matrix", str(mat_path), "--out-matrix", str(out_matrix),
                "--out-plan", str(out_plan),
            ]
        )
        assert rc == 0
        extended = EmbeddingMatrix.load_binary(out_matrix)
        assert extended.rows == len(merged)
        assert np.array_equal(
            extended.data[: merged.original_size].view(np.uint32),
            mat.data.view(np.uint32),
        )
        plan = json.loads(out_plan.read_text(encoding="utf-8"))
        task_ids = [e.id for e in merged.entries if e.origin == "task"]
        assert [p["new_id"] for p in plan] == task_ids

    def test_apply_existing_plan(self, workdir, tmp_path):
        merged = MergedVocab.load_json(workdir["merged"])
        rng = np.random.default_rng(43)
        mat_path = tmp_path / "orig.tate"
        EmbeddingMatrix(
            rng.normal(size=(merged.original_size, 4)).astype(np.float32)
        ).save_binary(mat_path)
        plan_path = tmp_path / "plan.json"
        out1 = tmp_path / "a.tate"
        assert main(["map-embed", "--merged", str(workdir["merged"]),
                     "--matrix", str(mat_path), "--out-matrix", str(out1),
                     "--out-plan", str(plan_path)]) == 0
        out2 = tmp_path / "b.tate"
        assert main(["map-embed", "--matrix", str(mat_path),
                     "--plan-in", str(plan_path), "--out-matrix", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestStats:
    def test_efficiency_json(self, workdir, capsys):
        rc = main(
            [
                "stats", "--efficiency", "--corpus", str(workdir["corpus"]),
                "--vocab", str(workdir["merged"]), "--json",
            ]
        )
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        eff = doc["efficiency"]
        assert eff["len_per_tok"] == pytest.approx(eff["len_units"] / eff["n_tok"])

    def test_constitution_fractions_sum(self, workdir, tmp_path, capsys, monkeypatch):
        encoded = tmp_path / "enc.txt"
        rc, out = run_lines(
            ["encode", "--vocab", str(workdir["merged"]),
             "--input", str(workdir["corpus"])],
            "", capsys, monkeypatch,
        )
        assert rc == 0
        encoded.write_text(out, encoding="utf-8")
        rc = main(
            ["stats", "--constitution", "--merged", str(workdir["merged"]),
             "--encoded", str(encoded), "--json"]
        )
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        c = doc["constitution"]
        total = c["overlap_frac"] + c["non_overlap_frac"] + c["original_frac"]
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_buckets(self, workdir, capsys):
        rc = main(["stats", "--buckets", "--vocab", str(workdir["vocab"]), "--json"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["buckets"]) == 6

    def test_char_length_unit(self, workdir, capsys):
        rc = main(
            [
                "stats", "--efficiency", "--corpus", str(workdir["corpus"]),
                "--length-unit", "char", "--vocab", str(workdir["merged"]), "--json",
            ]
        )
        assert rc == 0
        chars = json.loads(capsys.readouterr().out)["efficiency"]
        rc = main(
            [
                "stats", "--efficiency", "--corpus", str(workdir["corpus"]),
                "--length-unit", "word", "--vocab", str(workdir["merged"]), "--json",
            ]
        )
        assert rc == 0
        words = json.loads(capsys.readouterr().out)["efficiency"]
        # Same encodings, different length units: chars per text > words per text.
        assert chars["n_tok"] == words["n_tok"]
        assert chars["len_units"] > words["len_units"]


class TestSweep:
    def test_increments_monotone_and_bounded(self, workdir, tmp_path, capsys):
        out_dir = tmp_path / "sweep"
        rc = main(
            [
                "sweep", "--corpus", str(workdir["corpus"]),
                "--original", str(workdir["original"]),
                "--special", "<pad>", "--special", "<unk>",
                "--special", "<s>", "--special", "</s>",
                "--sizes", "60,90,120", "--out-dir", str(out_dir), "--json",
            ]
        )
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        rows = doc["rows"]
        assert [r["task_size"] for r in rows] == [60, 90, 120]
        increments = [r["increment"] for r in rows]
        assert increments == sorted(increments)
        for row in rows:
            assert row["increment"] <= row["task_size"]

    def test_single_size(self, workdir, tmp_path, capsys):
        rc = main(
            [
                "sweep", "--corpus", str(workdir["corpus"]),
                "--original", str(workdir["original"]),
                "--special", "<pad>", "--sizes", "80",
                "--out-dir", str(tmp_path / "s"), "--json",
            ]
        )
        assert rc == 0
        assert len(json.loads(capsys.readouterr().out)["rows"]) == 1


class TestAtomicOutputs:
    def test_failed_run_leaves_no_partial_file(self, tmp_path):
        out = tmp_path / "vocab.tsv"
        rc = main(["train", "--corpus", str(tmp_path / "missing.txt"), "--out", str(out)])
        assert rc == 2
        assert not out.exists()
        assert not out.with_name(out.name + ".tmp").exists()


class TestGenCorpus:
    def test_deterministic_corpus(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        assert main(["gen-corpus", "--out", str(a), "--sentences", "40"]) == 0
        assert main(["gen-corpus", "--out", str(b), "--sentences", "40"]) == 0
        assert a.read_bytes() == b.read_bytes()
