"""Run observation: usage ledger, budget watching, and asset finalization.

The monitor consumes the engine's event stream. It never mutates a run
directly; its only influence is the actions it hands back (pop requests and
warnings).
"""

from __future__ import annotations

import json
import re
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

EVENT_KINDS = ("append", "dispatch", "terminate", "pop", "warning")

ACTION_NONE = "none"
ACTION_WARN = "warn"
ACTION_REQUEST_POP = "request_pop"
ACTION_RECORD_ASSET = "record_asset"


def estimate_tokens(text: str) -> int:
    """Default token estimator: ceil(len / 4). Swap in a real tokenizer freely."""
    return -(-len(text) // 4)


@dataclass(frozen=True)
class MonitorEvent:
    timestamp: float
    section_id: str
    kind: str
    payload: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ts": self.timestamp,
            "section": self.section_id,
            "event": self.kind,
            "payload": self.payload,
        }


def make_event(section_id: str, kind: str, payload: dict[str, Any]) -> MonitorEvent:
    return MonitorEvent(time.time(), section_id, kind, payload)


@dataclass(frozen=True)
class Action:
    kind: str
    section_id: str
    message: str = ""


@dataclass
class SectionUsage:
    prompt_tokens: int = 0
    completion_tokens: int = 0
    backend_calls: int = 0
    tool_calls: int = 0
    tool_errors: int = 0

    def to_dict(self) -> dict[str, int]:
        return {
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "backend_calls": self.backend_calls,
            "tool_calls": self.tool_calls,
            "tool_errors": self.tool_errors,
        }


class UsageLedger:
    """Per-section counters; the global view is always their sum."""

    def __init__(self) -> None:
        self.per_section: dict[str, SectionUsage] = {}

    def section(self, section_id: str) -> SectionUsage:
        return self.per_section.setdefault(section_id, SectionUsage())

    def totals(self) -> SectionUsage:
        total = SectionUsage()
        for usage in self.per_section.values():
            total.prompt_tokens += usage.prompt_tokens
            total.completion_tokens += usage.completion_tokens
            total.backend_calls += usage.backend_calls
            total.tool_calls += usage.tool_calls
            total.tool_errors += usage.tool_errors
        return total


class Monitor:
    """Event consumer tracking usage and watching per-section token budgets.

    Events may arrive from concurrent section workers; a lock serializes them
    so the ledger has a single logical consumer.
    """

    def __init__(self, token_budget: int | None = None) -> None:
        self.token_budget = token_budget
        self.ledger = UsageLedger()
        self.warnings: list[str] = []
        self._closed: set[str] = set()
        self._lock = threading.Lock()

    def process_event(self, event: MonitorEvent) -> list[Action]:
        with self._lock:
            return self._process(event)

    def _process(self, event: MonitorEvent) -> list[Action]:
        sid = event.section_id
        if event.kind not in EVENT_KINDS:
            return [Action(ACTION_WARN, sid, f"unknown event kind {event.kind!r}")]
        if sid in self._closed:
            return [Action(ACTION_WARN, sid, f"event {event.kind!r} after terminate")]

        usage = self.ledger.section(sid)
        payload = event.payload

        if event.kind == "append":
            if payload.get("backend_call"):
                usage.backend_calls += 1
                usage.prompt_tokens += int(payload.get("prompt_tokens", 0))
                usage.completion_tokens += int(payload.get("completion_tokens", 0))
            estimate = payload.get("token_estimate")
            if (
                self.token_budget is not None
                and estimate is not None
                and estimate > self.token_budget
            ):
                return [
                    Action(
                        ACTION_REQUEST_POP,
                        sid,
                        f"token estimate {estimate} over budget {self.token_budget}",
                    )
                ]
        elif event.kind == "dispatch":
            usage.tool_calls += 1
            if payload.get("status") == "tool_error":
                usage.tool_errors += 1
        elif event.kind == "terminate":
            self._closed.add(sid)
            assets = payload.get("assets") or []
            if assets:
                return [Action(ACTION_RECORD_ASSET, sid, ", ".join(sorted(assets)))]
        elif event.kind == "warning":
            self.warnings.append(f"{sid}: {payload.get('message', '')}")
        # "pop" only acknowledges that a requested pop happened
        return []


class JsonlEventWriter:
    """Appends every event as one JSON line; the stream the monitor also sees."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def __call__(self, event: MonitorEvent) -> None:
        line = json.dumps(event.to_dict(), ensure_ascii=False)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line + "\n")


def _safe_name(name: str) -> str:
    return re.sub(r"[^\w.-]+", "_", name)


def finalize_run(
    states: dict[str, Any],
    ledger: UsageLedger,
    out_dir: str | Path,
    now: Callable[[], str] | None = None,
) -> Path:
    """Write run_summary.json and copy all section assets under out_dir.

    Deterministic apart from the generated_at header: rerunning over the same
    states produces byte-identical output below that line.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write-probe"
    probe.write_text("", encoding="utf-8")  # fail here before any partial write
    probe.unlink()

    sections: dict[str, Any] = {}
    for sid, state in states.items():
        asset_paths: dict[str, str] = {}
        for name, content in sorted(state.assets.items()):
            rel = Path("assets") / _safe_name(sid) / _safe_name(name)
            target = out / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(content, encoding="utf-8")
            asset_paths[name] = str(rel)
        sections[sid] = {
            "status": state.status,
            "iterations": state.iterations,
            "retries_used": state.retries_used,
            "review_verdict": state.review_verdict,
            "assets": asset_paths,
            "usage": ledger.section(sid).to_dict(),
        }

    timestamp = now() if now else datetime.now(timezone.utc).isoformat()
    summary = {
        "generated_at": timestamp,
        "sections": sections,
        "usage": ledger.totals().to_dict(),
    }
    path = out / "run_summary.json"
    path.write_text(
        json.dumps(summary, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    return path
