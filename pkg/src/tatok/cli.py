"""The `tat` command line:

    tat {train|merge|encode|decode|sample|map-embed|stats|sweep} [--config PATH] [flags]

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
With --json each command writes one machine-readable summary object to
stdout; diagnostics always go to stderr.  Output files are written to a
temporary name and renamed, so failed runs never leave partial artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager
from pathlib import Path

from . import config as config_mod
from . import corpus as corpus_mod
from . import metrics as metrics_mod
from . import seed as seed_mod
from . import synth as synth_mod
from . import trainer as trainer_mod
from .embedding import EmbeddingMatrix, MappingPlan, extend_matrix, plan_mapping
from .errors import ConfigError, EmptyInput, TatError
from .lattice import SamplerConfig, Segmentation, build_lattice, decode, sample, viterbi
from .merge import MergeConfig, MergedVocab, OriginalVocab, merge

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise UsageError(message)


@contextmanager
def atomic_path(final: str | Path):
    """Yield a temporary path, renamed onto `final` only on success."""
    final = Path(final)
    final.parent.mkdir(parents=True, exist_ok=True)
    tmp = final.with_name(final.name + ".tmp")
    try:
        yield tmp
        os.replace(tmp, final)
    finally:
        if tmp.exists():
            tmp.unlink()


def _load_cfg(args) -> config_mod.PipelineConfig:
    """Config file first, then explicit flags, then TAT_SEED."""
    if getattr(args, "config", None):
        cfg = config_mod.load_config(args.config)
    else:
        cfg = config_mod.validate({})
    overrides = {
        "corpus": "corpus_path",
        "length_unit": "length_unit",
        "marker": "marker",
        "target_size": "target_size",
        "seed_size": "seed_size",
        "max_piece_len": "max_piece_len",
        "em_iters": "em_iters_per_round",
        "shrink": "shrink_factor",
        "alpha": "alpha",
        "original": "original_vocab",
        "original_format": "original_format",
        "big_score": "big_score",
        "translation": "marker_translation",
        "out_dir": "output_dir",
        "seed": "seed",
    }
    for flag, field in overrides.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, field, value)
    if getattr(args, "special", None):
        cfg.special_tokens = list(args.special)
    if getattr(args, "keep_original_scores", False):
        cfg.keep_original_scores = True
    env_seed = os.environ.get("TAT_SEED")
    if env_seed is not None:
        cfg.seed = int(env_seed)
    return cfg


def _echo_config(cfg: config_mod.PipelineConfig, out_dir: str | Path) -> None:
    with atomic_path(Path(out_dir) / "resolved-config.yaml") as tmp:
        tmp.write_text(cfg.to_yaml(), encoding="utf-8")


def _emit(args, summary: dict, text: str | None = None) -> None:
    if getattr(args, "json", False):
        print(json.dumps(summary, ensure_ascii=False))
    elif text:
        print(text)


def _load_vocab(path: str):
    if str(path).endswith(".json"):
        return MergedVocab.load_json(path)
    return trainer_mod.ScoredVocab.load_tsv(path)


def _load_original(cfg: config_mod.PipelineConfig) -> OriginalVocab:
    if cfg.original_vocab is None:
        raise ConfigError("no original vocabulary given (merge.original_vocab or --original)")
    path = cfg.original_vocab
    fmt = cfg.original_format
    if fmt == "auto":
        fmt = {"json": "json", "tsv": "tsv"}.get(Path(path).suffix.lstrip("."), "list")
    if fmt == "json":
        return OriginalVocab.from_json_map(path, cfg.special_tokens)
    if fmt == "tsv":
        return OriginalVocab.from_tsv(path, cfg.special_tokens)
    return OriginalVocab.from_token_lines(path, cfg.special_tokens)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _train_pipeline(cfg: config_mod.PipelineConfig, target: int):
    if cfg.corpus_path is None:
        raise ConfigError("no corpus given (corpus.path or --corpus)")
    handle = corpus_mod.ingest(cfg.corpus_path, cfg.length_unit_mode, cfg.marker)
    seed_vocab = seed_mod.extract_seed(
        handle, cfg.max_piece_len, cfg.resolved_seed_size(target)
    )
    log: list[trainer_mod.RoundLog] = []
    train_cfg = trainer_mod.TrainConfig(
        target_size=target,
        em_iters_per_round=cfg.em_iters_per_round,
        shrink_factor=cfg.shrink_factor,
        seed=cfg.seed,
    )
    vocab = trainer_mod.train(seed_vocab, handle, train_cfg, log)
    return handle, vocab, log


def cmd_train(args) -> int:
    cfg = _load_cfg(args)
    out = args.out or str(Path(cfg.output_dir) / "vocab.tsv")
    _, vocab, log = _train_pipeline(cfg, cfg.target_size)
    with atomic_path(out) as tmp:
        vocab.save_tsv(tmp)
    log_path = args.log or out + ".log"
    with atomic_path(log_path) as tmp:
        rows = [
            {"round": r.round_index, "size": r.size, "logliks": r.logliks, "pruned": r.pruned}
            for r in log
        ]
        tmp.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    _echo_config(cfg, Path(out).parent)
    _emit(
        args,
        {"command": "train", "ok": True, "out": str(out), "size": len(vocab),
         "rounds": len(log), "log": str(log_path)},
        f"wrote {out} ({len(vocab)} tokens, {len(log)} rounds)",
    )
    return EXIT_OK


def cmd_merge(args) -> int:
    cfg = _load_cfg(args)
    task = trainer_mod.ScoredVocab.load_tsv(args.task)
    orig = _load_original(cfg)
    merge_cfg = MergeConfig(
        big_score=cfg.big_score,
        marker_translation=cfg.marker_translation,
        keep_original_scores=cfg.keep_original_scores,
    )
    merged = merge(orig, task, merge_cfg)
    out = args.out or str(Path(cfg.output_dir) / "merged.json")
    with atomic_path(out) as tmp:
        merged.save_json(tmp)
    _echo_config(cfg, Path(out).parent)
    increment = len(merged) - merged.original_size
    _emit(
        args,
        {"command": "merge", "ok": True, "out": str(out), "size": len(merged),
         "original_size": merged.original_size, "increment": increment,
         "big_score": merged.big_score},
        f"wrote {out} ({merged.original_size} original + {increment} new tokens)",
    )
    return EXIT_OK


def _iter_lines(args):
    if getattr(args, "input", None):
        with open(args.input, encoding="utf-8") as fh:
            yield from (line.rstrip("\n") for line in fh)
    else:
        yield from (line.rstrip("\n") for line in sys.stdin)


def _open_out(args):
    if getattr(args, "output", None):
        return open(args.output, "w", encoding="utf-8")
    return sys.stdout


def _encode_line(raw: str, vocab, args, cfg: SamplerConfig | None, index: int) -> Segmentation:
    mode = getattr(args, "mode", "viterbi")
    if args.unk_passthrough is None:
        text = corpus_mod.normalize_text(raw, vocab.marker)
        lat = build_lattice(text, vocab)
        return viterbi(lat) if mode == "viterbi" else sample(lat, cfg, index)
    # Passthrough: uncovered characters map to the designated id and do not
    # enter the lattice probability model.
    unk_id = args.unk_passthrough
    covered = {t for _, t, _ in vocab.lattice_entries() if len(t) == 1}
    text = corpus_mod.normalize_text(raw, vocab.marker)
    ids: list[int] = []
    pieces: list[str] = []
    logprob = 0.0
    chunk = []
    unk_piece = vocab.token_of(unk_id) or "<unk>"

    def flush():
        nonlocal logprob
        if not chunk:
            return
        lat = build_lattice("".join(chunk), vocab)
        seg = viterbi(lat) if mode == "viterbi" else sample(lat, cfg, index)
        ids.extend(seg.token_ids)
        pieces.extend(seg.pieces)
        logprob += seg.logprob
        chunk.clear()

    for ch in text:
        if ch in covered:
            chunk.append(ch)
        else:
            flush()
            ids.append(unk_id)
            pieces.append(unk_piece)
    flush()
    return Segmentation(tuple(ids), tuple(pieces), logprob)


def _run_encode(args, mode: str) -> int:
    cfg = _load_cfg(args)
    vocab = _load_vocab(args.vocab)
    args.mode = mode
    sampler = SamplerConfig(alpha=cfg.alpha, seed=cfg.seed)
    out = _open_out(args)
    count = 0
    try:
        for i, raw in enumerate(_iter_lines(args)):
            seg = _encode_line(raw, vocab, args, sampler, args.draw_offset + i)
            if args.pieces:
                print(" ".join(seg.pieces), file=out)
            else:
                print(" ".join(str(t) for t in seg.token_ids), file=out)
            count += 1
    finally:
        if out is not sys.stdout:
            out.close()
    _emit(args, {"command": mode if mode == "sample" else "encode", "ok": True,
                 "lines": count, "mode": mode, "alpha": sampler.alpha,
                 "seed": sampler.seed})
    return EXIT_OK


def cmd_encode(args) -> int:
    return _run_encode(args, args.mode)


def cmd_sample(args) -> int:
    return _run_encode(args, "sample")


def cmd_decode(args) -> int:
    vocab = _load_vocab(args.vocab)
    out = _open_out(args)
    count = 0
    try:
        for raw in _iter_lines(args):
            ids = [int(v) for v in raw.split()] if raw.strip() else []
            print(decode(ids, vocab), file=out)
            count += 1
    finally:
        if out is not sys.stdout:
            out.close()
    _emit(args, {"command": "decode", "ok": True, "lines": count})
    return EXIT_OK


def cmd_map_embed(args) -> int:
    cfg = _load_cfg(args)
    merged = MergedVocab.load_json(args.merged) if args.merged else None
    matrix_path = args.matrix or cfg.embedding_matrix
    if matrix_path is None:
        raise ConfigError("no embedding matrix given (--matrix or embedding.matrix)")
    if args.text_matrix:
        matrix = EmbeddingMatrix.load_text(matrix_path)
    else:
        matrix = EmbeddingMatrix.load_binary(matrix_path)

    if args.plan_in:
        plan = MappingPlan.load_json(args.plan_in)
        merged_size = len(merged) if merged else (
            max(it.new_id for it in plan.items) + 1 if plan.items else matrix.rows
        )
    else:
        if merged is None:
            raise ConfigError("map-embed needs --merged unless --plan-in is given")
        plan = plan_mapping(merged)
        merged_size = len(merged)

    extended = extend_matrix(matrix, plan, merged_size)
    out_matrix = args.out_matrix or str(Path(cfg.output_dir) / "embeddings.tate")
    with atomic_path(out_matrix) as tmp:
        if args.text_matrix:
            extended.save_text(tmp)
        else:
            extended.save_binary(tmp)
    summary = {"command": "map-embed", "ok": True, "out_matrix": str(out_matrix),
               "rows": extended.rows, "dim": extended.dim, "new_rows": len(plan.items)}
    if args.out_plan:
        with atomic_path(args.out_plan) as tmp:
            plan.save_json(tmp)
        summary["out_plan"] = str(args.out_plan)
    _echo_config(cfg, Path(out_matrix).parent)
    _emit(args, summary, f"wrote {out_matrix} ({extended.rows}x{extended.dim})")
    return EXIT_OK


def cmd_stats(args) -> int:
    cfg = _load_cfg(args)
    if args.efficiency:
        if cfg.corpus_path is None:
            raise ConfigError("efficiency stats need a corpus (--corpus)")
        handle = corpus_mod.ingest(cfg.corpus_path, cfg.length_unit_mode, cfg.marker)
        vocab = _load_vocab(args.vocab)
        report = metrics_mod.efficiency(
            handle, vocab, args.mode, SamplerConfig(alpha=cfg.alpha, seed=cfg.seed)
        )
        _emit(args, {"command": "stats", "ok": True, "efficiency": report.to_dict()},
              metrics_mod.format_efficiency(report))
        return EXIT_OK
    if args.constitution:
        merged = MergedVocab.load_json(args.merged)
        segs = []
        with open(args.encoded, encoding="utf-8") as fh:
            for line in fh:
                ids = tuple(int(v) for v in line.split())
                pieces = tuple(merged.entry_of(i).token for i in ids)
                segs.append(Segmentation(ids, pieces, 0.0))
        report = metrics_mod.constitution(segs, merged)
        _emit(args, {"command": "stats", "ok": True, "constitution": report.to_dict()},
              metrics_mod.format_constitution(report))
        return EXIT_OK
    if args.buckets:
        vocab = _load_vocab(args.vocab)
        rows = metrics_mod.length_bucket_table(vocab, k=args.top)
        _emit(args, {"command": "stats", "ok": True, "buckets": rows},
              metrics_mod.format_buckets(rows))
        return EXIT_OK
    raise UsageError("choose one of --efficiency, --constitution, --buckets")


def cmd_sweep(args) -> int:
    cfg = _load_cfg(args)
    sizes = args.sizes or cfg.sweep_sizes
    if not sizes:
        raise ConfigError("sweep needs sizes (--sizes or sweep.sizes)")
    orig = _load_original(cfg)
    out_dir = Path(cfg.output_dir)
    rows = []
    for size in sizes:
        handle, vocab, _ = _train_pipeline(cfg, size)
        vocab_path = out_dir / f"vocab-{size}.tsv"
        with atomic_path(vocab_path) as tmp:
            vocab.save_tsv(tmp)
        merged = merge(
            orig,
            vocab,
            MergeConfig(
                big_score=cfg.big_score,
                marker_translation=cfg.marker_translation,
                keep_original_scores=cfg.keep_original_scores,
            ),
        )
        merged_path = out_dir / f"merged-{size}.json"
        with atomic_path(merged_path) as tmp:
            merged.save_json(tmp)
        report = metrics_mod.efficiency(handle, merged, timing_runs=1)
        rows.append(
            {
                "task_size": size,
                "merged_size": len(merged),
                "increment": len(merged) - merged.original_size,
                "n_tok": report.n_tok,
                "len_per_tok": report.len_per_tok,
            }
        )
    report_path = out_dir / "sweep.json"
    with atomic_path(report_path) as tmp:
        tmp.write_text(json.dumps(rows, indent=1) + "\n", encoding="utf-8")
    _echo_config(cfg, out_dir)
    table = [f"{'size':>8} {'merged':>8} {'increment':>10} {'#Tok':>8} {'Len/#Tok':>9}"]
    table += [
        f"{r['task_size']:>8} {r['merged_size']:>8} {r['increment']:>10} "
        f"{r['n_tok']:>8.2f} {r['len_per_tok']:>9.3f}"
        for r in rows
    ]
    _emit(args, {"command": "sweep", "ok": True, "rows": rows, "out": str(report_path)},
          "\n".join(table))
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    seed = args.seed if args.seed is not None else 7
    sentences = synth_mod.generate_corpus(args.sentences, seed)
    with atomic_path(args.out) as tmp:
        synth_mod.write_corpus(tmp, sentences)
    if args.original_out:
        tokens, specials = synth_mod.generate_original_tokens(seed + 1, args.original_size)
        with atomic_path(args.original_out) as tmp:
            tmp.write_text("\n".join(tokens) + "\n", encoding="utf-8")
        print(f"specials: {' '.join(specials)}", file=sys.stderr)
    _emit(args, {"command": "gen-corpus", "ok": True, "out": args.out,
                 "sentences": len(sentences)},
          f"wrote {args.out} ({len(sentences)} sentences)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML pipeline configuration")
    p.add_argument("--json", action="store_true", help="machine-readable summary on stdout")
    p.add_argument("--threads", type=int, default=1, help="parallelism cap (currently single-threaded)")
    p.add_argument("--seed", type=int, default=None, help="global RNG seed")


def build_parser() -> _Parser:
    parser = _Parser(prog="tat", description="Task-adaptive tokenization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[], help="train a task vocabulary")
    _add_common(p)
    p.add_argument("--corpus", help="one sentence per line, UTF-8")
    p.add_argument("--length-unit", dest="length_unit", choices=["word", "char"])
    p.add_argument("--marker", help="boundary marker character")
    p.add_argument("--target-size", dest="target_size", type=int)
    p.add_argument("--seed-size", dest="seed_size", type=int)
    p.add_argument("--max-piece-len", dest="max_piece_len", type=int)
    p.add_argument("--em-iters", dest="em_iters", type=int)
    p.add_argument("--shrink", dest="shrink", type=float)
    p.add_argument("--out", help="output vocabulary TSV")
    p.add_argument("--log", help="training log path (JSON lines)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("merge", help="merge a task vocabulary into an original one")
    _add_common(p)
    p.add_argument("--task", required=True, help="trained vocabulary TSV")
    p.add_argument("--original", help="original vocabulary file")
    p.add_argument("--original-format", dest="original_format",
                   choices=["auto", "list", "tsv", "json"])
    p.add_argument("--special", action="append", help="special token (repeatable)")
    p.add_argument("--big-score", dest="big_score", type=float)
    p.add_argument("--translation", choices=["none", "metaspace", "byte", "wordpiece"])
    p.add_argument("--keep-original-scores", action="store_true")
    p.add_argument("--out", help="output merged vocabulary JSON")
    p.set_defaults(func=cmd_merge)

    for name, mode in (("encode", None), ("sample", "sample")):
        p = sub.add_parser(name, help=f"{name} text lines from stdin or --input")
        _add_common(p)
        p.add_argument("--vocab", required=True, help="vocabulary TSV or merged JSON")
        if mode is None:
            p.add_argument("--mode", choices=["viterbi", "sample"], default="viterbi")
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--draw-offset", dest="draw_offset", type=int, default=0,
                       help="stream index of the first input line")
        p.add_argument("--pieces", action="store_true", help="print pieces, not ids")
        p.add_argument("--unk-passthrough", dest="unk_passthrough", type=int, default=None,
                       help="map uncovered characters to this token id")
        p.add_argument("--input")
        p.add_argument("--output")
        p.set_defaults(func=cmd_encode if mode is None else cmd_sample)

    p = sub.add_parser("decode", help="decode id lines back to text")
    _add_common(p)
    p.add_argument("--vocab", required=True)
    p.add_argument("--input")
    p.add_argument("--output")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("map-embed", help="plan and apply embedding extension")
    _add_common(p)
    p.add_argument("--merged", help="merged vocabulary JSON")
    p.add_argument("--matrix", help="original embedding matrix")
    p.add_argument("--text-matrix", dest="text_matrix", action="store_true",
                   help="matrix files are text, not binary")
    p.add_argument("--plan-in", dest="plan_in", help="apply an existing plan JSON")
    p.add_argument("--out-matrix", dest="out_matrix")
    p.add_argument("--out-plan", dest="out_plan")
    p.set_defaults(func=cmd_map_embed)

    p = sub.add_parser("stats", help="efficiency / constitution / bucket reports")
    _add_common(p)
    p.add_argument("--efficiency", action="store_true")
    p.add_argument("--constitution", action="store_true")
    p.add_argument("--buckets", action="store_true")
    p.add_argument("--corpus")
    p.add_argument("--length-unit", dest="length_unit", choices=["word", "char"])
    p.add_argument("--vocab")
    p.add_argument("--merged")
    p.add_argument("--encoded", help="file of encoded id lines")
    p.add_argument("--mode", choices=["viterbi", "sample"], default="viterbi")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--top", type=int, default=5)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("sweep", help="train and merge across vocabulary sizes")
    _add_common(p)
    p.add_argument("--corpus")
    p.add_argument("--length-unit", dest="length_unit", choices=["word", "char"])
    p.add_argument("--sizes", type=lambda v: [int(x) for x in v.split(",")],
                   help="comma-separated task vocabulary sizes")
    p.add_argument("--original")
    p.add_argument("--original-format", dest="original_format",
                   choices=["auto", "list", "tsv", "json"])
    p.add_argument("--special", action="append")
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-corpus", help="write the bundled synthetic corpus")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--sentences", type=int, default=300)
    p.add_argument("--original-out", dest="original_out",
                   help="also write a synthetic original vocabulary")
    p.add_argument("--original-size", dest="original_size", type=int, default=600)
    p.set_defaults(func=cmd_gen_corpus)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = None
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TatError, OSError, ValueError) as exc:
        if args is not None and getattr(args, "json", False):
            print(json.dumps({"ok": False, "error": {
                "type": type(exc).__name__, "message": str(exc)}}))
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
