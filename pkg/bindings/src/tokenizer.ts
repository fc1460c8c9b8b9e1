/**
 * Tokenizer handle backed by the `tat` command line tool.
 *
 * Wraps a merged-vocabulary (or trained-vocabulary) file so that training
 * pipelines outside Python can encode with the exact best path or draw a
 * fresh segmentation per batch, with every draw pinned by (seed, draw
 * index) exactly as the CLI pins it.
 */

import { existsSync } from "node:fs";

import { resolveBin, runTat } from "./cli.js";
import { ConfigError } from "./errors.js";

export type EncodeMode = "viterbi" | "sample";

export interface LoadOptions {
  /** Path to the tat binary; defaults to $TAT_BIN, then "tat" on PATH. */
  binPath?: string;
  /** Default regularization coefficient for sample mode. */
  alpha?: number;
  /** Default RNG seed for sample mode. */
  seed?: number;
}

export interface EncodeOptions {
  mode?: EncodeMode;
  alpha?: number;
  seed?: number;
  /** Stream index of this text (line offset in CLI terms). */
  drawIndex?: number;
}

function parseIdLines(stdout: string): number[][] {
  const body = stdout.endsWith("\n") ? stdout.slice(0, -1) : stdout;
  if (body === "") {
    return [];
  }
  return body.split("\n").map((line) =>
    line === "" ? [] : line.split(" ").map((v) => Number.parseInt(v, 10)),
  );
}

export class BoundTokenizer {
  private constructor(
    readonly vocabPath: string,
    private readonly bin: string,
    private readonly defaults: { alpha: number; seed: number },
  ) {}

  /**
   * Open a vocabulary file and verify the CLI can read it.
   *
   * @param vocabPath Trained vocabulary TSV or merged vocabulary JSON.
   */
  static async load(vocabPath: string, options: LoadOptions = {}): Promise<BoundTokenizer> {
    if (!existsSync(vocabPath)) {
      throw new ConfigError(`vocabulary file not found: ${vocabPath}`);
    }
    const bin = resolveBin(options.binPath);
    // Cheap probe; surfaces unreadable or malformed files as core errors.
    await runTat(bin, ["stats", "--buckets", "--vocab", vocabPath, "--json"]);
    return new BoundTokenizer(vocabPath, bin, {
      alpha: options.alpha ?? 0.5,
      seed: options.seed ?? 0,
    });
  }

  private encodeArgs(opts: EncodeOptions): string[] {
    const mode = opts.mode ?? "viterbi";
    const args = ["encode", "--vocab", this.vocabPath, "--mode", mode];
    if (mode === "sample") {
      args.push("--alpha", String(opts.alpha ?? this.defaults.alpha));
      args.push("--seed", String(opts.seed ?? this.defaults.seed));
      args.push("--draw-offset", String(opts.drawIndex ?? 0));
    }
    return args;
  }

  /** Encode one text into token ids. */
  async encode(text: string, opts: EncodeOptions = {}): Promise<number[]> {
    if (text.includes("\n")) {
      throw new TypeError("encode takes a single line; use batchEncode for many");
    }
    const { stdout } = await runTat(this.bin, this.encodeArgs(opts), text + "\n");
    return parseIdLines(stdout)[0] ?? [];
  }

  /** Encode with stochastic segmentation; shorthand for mode "sample". */
  async sample(text: string, opts: Omit<EncodeOptions, "mode"> = {}): Promise<number[]> {
    return this.encode(text, { ...opts, mode: "sample" });
  }

  /**
   * Encode many texts in one process.
   *
   * Text i uses stream index `drawIndex + i`, so the result is
   * element-identical to independent `encode` calls with those indices.
   */
  async batchEncode(texts: string[], opts: EncodeOptions = {}): Promise<number[][]> {
    if (texts.length === 0) {
      return [];
    }
    for (const text of texts) {
      if (text.includes("\n")) {
        throw new TypeError("batchEncode texts must be single lines");
      }
    }
    const { stdout } = await runTat(this.bin, this.encodeArgs(opts), texts.join("\n") + "\n");
    const rows = parseIdLines(stdout);
    if (rows.length !== texts.length) {
      throw new ConfigError(`expected ${texts.length} encoded lines, got ${rows.length}`);
    }
    return rows;
  }

  /** Map token ids back to text. */
  async decode(ids: number[]): Promise<string> {
    const { stdout } = await runTat(
      this.bin,
      ["decode", "--vocab", this.vocabPath],
      ids.join(" ") + "\n",
    );
    return stdout.endsWith("\n") ? stdout.slice(0, -1) : stdout;
  }
}

export interface MapEmbedOptions {
  binPath?: string;
  /** Treat matrix files as text (one row of decimals per line). */
  textMatrix?: boolean;
}

/**
 * Apply a mapping plan to an embedding matrix file, writing the extended
 * matrix: new rows are the mean of their plan's source rows.
 */
export async function mapEmbed(
  matrixPath: string,
  planPath: string,
  outPath: string,
  options: MapEmbedOptions = {},
): Promise<void> {
  const args = [
    "map-embed",
    "--matrix", matrixPath,
    "--plan-in", planPath,
    "--out-matrix", outPath,
  ];
  if (options.textMatrix) {
    args.push("--text-matrix");
  }
  await runTat(resolveBin(options.binPath), args);
}
