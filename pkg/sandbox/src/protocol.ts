/**
 * Wire protocol: one JSON request per line on stdin, one JSON response per
 * line on stdout. A malformed request yields an `{"error": ...}` line that is
 * distinct from every execution verdict; the process keeps serving and exits
 * 0 when stdin closes.
 */

export interface ExecRequest {
  program: string;
  timeout_s: number;
  output_cap: number;
}

export interface ExecResponse {
  verdict: "passed" | "assertion_failed" | "runtime_error" | "timeout";
  detail: string;
}

export interface ProtocolError {
  error: string;
}

const DEFAULT_OUTPUT_CAP = 65536;

export function parseRequest(line: string): ExecRequest | ProtocolError {
  let data: unknown;
  try {
    data = JSON.parse(line);
  } catch (err) {
    return { error: `protocol: request is not valid JSON: ${String(err)}` };
  }
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    return { error: "protocol: request must be a JSON object" };
  }
  const record = data as Record<string, unknown>;
  if (typeof record.program !== "string") {
    return { error: "protocol: 'program' must be a string" };
  }
  const timeout = record.timeout_s ?? 10;
  if (typeof timeout !== "number" || !Number.isFinite(timeout) || timeout <= 0) {
    return { error: "protocol: 'timeout_s' must be a positive number" };
  }
  const cap = record.output_cap ?? DEFAULT_OUTPUT_CAP;
  if (typeof cap !== "number" || !Number.isInteger(cap) || cap <= 0) {
    return { error: "protocol: 'output_cap' must be a positive integer" };
  }
  return { program: record.program, timeout_s: timeout, output_cap: cap };
}
