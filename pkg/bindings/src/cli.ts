/**
 * Process plumbing for the `tat` command line tool.
 *
 * The bindings never re-implement tokenization logic: every operation is
 * one CLI invocation, so binding output is the CLI's output by
 * construction.
 */

import { spawn } from "node:child_process";

import { InternalError, TatError, UsageError, errorFromName } from "./errors.js";

export interface RunResult {
  stdout: string;
  stderr: string;
}

/** Resolve the CLI binary: explicit option, then $TAT_BIN, then PATH. */
export function resolveBin(binPath?: string): string {
  return binPath ?? process.env.TAT_BIN ?? "tat";
}

const STDERR_ERROR = /^error: ([A-Za-z]+Error|[A-Za-z]+): (.*)$/m;

function toError(code: number, stderr: string): TatError {
  const match = STDERR_ERROR.exec(stderr);
  const message = match ? `${match[1]}: ${match[2]}` : stderr.trim() || `exit code ${code}`;
  if (code === 1) {
    return new UsageError(message);
  }
  if (code === 2 && match) {
    return errorFromName(match[1], match[2]);
  }
  if (code === 2) {
    return new TatError(message);
  }
  return new InternalError(message);
}

/**
 * Run one `tat` subcommand to completion.
 *
 * @param bin   Resolved binary path.
 * @param args  Subcommand and flags.
 * @param stdin Text piped to the process, if any.
 */
export function runTat(bin: string, args: string[], stdin?: string): Promise<RunResult> {
  return new Promise((resolve, reject) => {
    const child = spawn(bin, args, { stdio: ["pipe", "pipe", "pipe"] });
    let stdout = "";
    let stderr = "";
    child.stdout.setEncoding("utf8");
    child.stderr.setEncoding("utf8");
    child.stdout.on("data", (chunk: string) => (stdout += chunk));
    child.stderr.on("data", (chunk: string) => (stderr += chunk));
    child.on("error", (err) =>
      reject(new InternalError(`failed to launch ${bin}: ${err.message}`)),
    );
    child.on("close", (code) => {
      if (code === 0) {
        resolve({ stdout, stderr });
      } else {
        reject(toError(code ?? 3, stderr));
      }
    });
    if (stdin !== undefined) {
      child.stdin.write(stdin);
    }
    child.stdin.end();
  });
}
