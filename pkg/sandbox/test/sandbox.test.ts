import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import { mkdtempSync, readdirSync, rmSync, writeFileSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";
import { createInterface, type Interface } from "node:readline";
import { afterEach, describe, expect, it } from "vitest";

const MAIN = join(dirname(fileURLToPath(import.meta.url)), "..", "dist", "main.js");

interface Response {
  verdict?: string;
  detail?: string;
  error?: string;
}

/** Client for one sandbox service process. */
class SandboxClient {
  private child: ChildProcessWithoutNullStreams;
  private reader: Interface;
  private lines: string[] = [];
  private waiters: Array<(line: string) => void> = [];
  exitCode: Promise<number | null>;

  constructor() {
    this.child = spawn("node", [MAIN], { stdio: ["pipe", "pipe", "pipe"] });
    this.reader = createInterface({ input: this.child.stdout });
    this.reader.on("line", (line) => {
      const waiter = this.waiters.shift();
      if (waiter) {
        waiter(line);
      } else {
        this.lines.push(line);
      }
    });
    this.exitCode = new Promise((resolve) => {
      this.child.on("close", (code) => resolve(code));
    });
  }

  sendRaw(line: string): Promise<Response> {
    const next = new Promise<string>((resolve) => {
      const buffered = this.lines.shift();
      if (buffered !== undefined) {
        resolve(buffered);
      } else {
        this.waiters.push(resolve);
      }
    });
    this.child.stdin.write(line + "\n");
    return next.then((text) => JSON.parse(text) as Response);
  }

  send(program: string, timeoutS = 10, outputCap = 65536): Promise<Response> {
    return this.sendRaw(
      JSON.stringify({ program, timeout_s: timeoutS, output_cap: outputCap }),
    );
  }

  async close(): Promise<number | null> {
    this.child.stdin.end();
    return this.exitCode;
  }

  kill(): void {
    this.child.kill("SIGKILL");
  }
}

let clients: SandboxClient[] = [];

function client(): SandboxClient {
  const c = new SandboxClient();
  clients.push(c);
  return c;
}

afterEach(() => {
  for (const c of clients) {
    c.kill();
  }
  clients = [];
});

const FAILING_FLOAT_PROGRAM = [
  "def truncate_number(number: float) -> float:",
  "    return number - int(number)",
  "def check(candidate):",
  "    assert candidate(3.5) == 0.5",
  "    assert candidate(123456.789) == 0.789",
  "check(truncate_number)",
  "",
].join("\n");

describe("verdicts", () => {
  it("reports a passing program", async () => {
    const response = await client().send("assert 1 == 1\n");
    expect(response.verdict).toBe("passed");
  });

  it("reports the failing assertion with its source line", async () => {
    const response = await client().send(FAILING_FLOAT_PROGRAM);
    expect(response.verdict).toBe("assertion_failed");
    expect(response.detail).toContain("assert");
    expect(response.detail).toContain("123456.789");
  });

  it("reports runtime errors with the error text", async () => {
    const response = await client().send("undefined_name\n");
    expect(response.verdict).toBe("runtime_error");
    expect(response.detail).toContain("NameError");
  });

  it("kills an infinite loop at the wall-clock timeout", async () => {
    const started = Date.now();
    const response = await client().send("while True: pass\n", 1);
    const elapsed = Date.now() - started;
    expect(response.verdict).toBe("timeout");
    expect(elapsed).toBeLessThan(3000);
  }, 10000);

  it("is deterministic for a deterministic program", async () => {
    const c = client();
    const first = await c.send(FAILING_FLOAT_PROGRAM);
    const second = await c.send(FAILING_FLOAT_PROGRAM);
    expect(second).toEqual(first);
  });

  it("still passes when the program prints", async () => {
    const response = await client().send("print('x' * 10000)\n");
    expect(response.verdict).toBe("passed");
  });
});

describe("isolation and limits", () => {
  it("leaves the host directory unchanged when the program writes files", async () => {
    const hostDir = mkdtempSync(join(tmpdir(), "host-results-"));
    writeFileSync(join(hostDir, "keep.txt"), "before");
    const before = readdirSync(hostDir).sort();

    const response = await client().send(
      "with open('escape.txt', 'w') as f:\n    f.write('leak')\n",
    );
    expect(response.verdict).toBe("passed");
    expect(readdirSync(hostDir).sort()).toEqual(before);
    expect(readFileSync(join(hostDir, "keep.txt"), "utf8")).toBe("before");
    rmSync(hostDir, { recursive: true, force: true });
  });

  it("caps the detail to output_cap bytes", async () => {
    const response = await client().send(
      "raise ValueError('x' * 100000)\n",
      10,
      500,
    );
    expect(response.verdict).toBe("runtime_error");
    expect(Buffer.byteLength(response.detail ?? "", "utf8")).toBeLessThanOrEqual(500);
  });

  it("blocks socket creation", async () => {
    const response = await client().send(
      "import socket\nsocket.socket()\n",
    );
    expect(response.verdict).toBe("runtime_error");
    expect(response.detail).toContain("network access is disabled");
  });
});

describe("protocol", () => {
  it("rejects malformed JSON without dying", async () => {
    const c = client();
    const error = await c.sendRaw("{nope");
    expect(error.error).toMatch(/^protocol:/);
    expect(error.verdict).toBeUndefined();

    const ok = await c.send("assert True\n");
    expect(ok.verdict).toBe("passed");
  });

  it("rejects a missing program field", async () => {
    const error = await client().sendRaw(JSON.stringify({ timeout_s: 1 }));
    expect(error.error).toContain("'program'");
  });

  it("rejects a non-positive timeout", async () => {
    const error = await client().sendRaw(
      JSON.stringify({ program: "pass", timeout_s: 0 }),
    );
    expect(error.error).toContain("timeout_s");
  });

  it("serves multiple requests in order and exits 0 at stdin end", async () => {
    const c = client();
    const first = await c.send("assert True\n");
    const second = await c.send("assert False\n");
    expect(first.verdict).toBe("passed");
    expect(second.verdict).toBe("assertion_failed");
    expect(await c.close()).toBe(0);
  });
});
