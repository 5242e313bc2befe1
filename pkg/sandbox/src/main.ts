/**
 * Sandbox service entry point.
 *
 * Reads newline-delimited JSON requests from stdin, executes each program in
 * a fresh interpreter subprocess, and writes one JSON response per request to
 * stdout in arrival order. Exits 0 when stdin ends, regardless of verdicts.
 */

import { createInterface } from "node:readline";

import { runProgram, } from "./executor.js";
import { parseRequest } from "./protocol.js";

async function serve(): Promise<void> {
  const lines = createInterface({ input: process.stdin, crlfDelay: Infinity });
  let pending: Promise<void> = Promise.resolve();

  for await (const line of lines) {
    if (!line.trim()) {
      continue;
    }
    // Chain requests so responses keep arrival order.
    pending = pending.then(async () => {
      const parsed = parseRequest(line);
      if ("error" in parsed) {
        process.stdout.write(JSON.stringify(parsed) + "\n");
        return;
      }
      const response = await runProgram(parsed);
      process.stdout.write(JSON.stringify(response) + "\n");
    });
    await pending;
  }
  await pending;
}

serve().then(
  () => process.exit(0),
  (err) => {
    process.stderr.write(`sandbox fatal: ${String(err)}\n`);
    process.exit(1);
  },
);
