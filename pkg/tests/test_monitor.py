from __future__ import annotations

import json

import pytest

from jobloop.engine import SectionState
from jobloop.monitor import (
    ACTION_RECORD_ASSET,
    ACTION_REQUEST_POP,
    ACTION_WARN,
    JsonlEventWriter,
    Monitor,
    MonitorEvent,
    UsageLedger,
    estimate_tokens,
    finalize_run,
    make_event,
)


def event(kind: str, section: str = "s1", **payload) -> MonitorEvent:
    return MonitorEvent(0.0, section, kind, payload)


class TestEstimateTokens:
    def test_empty(self):
        assert estimate_tokens("") == 0

    def test_eight_chars(self):
        # Oracle: ceil(8 / 4).
        assert estimate_tokens("12345678") == -(-8 // 4) == 2

    def test_nine_chars(self):
        assert estimate_tokens("123456789") == -(-9 // 4) == 3


class TestLedger:
    def test_global_equals_sum_of_sections(self):
        ledger = UsageLedger()
        ledger.section("a").prompt_tokens = 10
        ledger.section("a").backend_calls = 2
        ledger.section("b").prompt_tokens = 5
        ledger.section("b").tool_errors = 1
        totals = ledger.totals()
        assert totals.prompt_tokens == 15
        assert totals.backend_calls == 2
        assert totals.tool_errors == 1


class TestProcessEvent:
    def test_dispatch_tool_error_counts(self):
        monitor = Monitor()
        monitor.process_event(event("dispatch", status="tool_error", tool="t"))
        usage = monitor.ledger.section("s1")
        assert usage.tool_calls == 1
        assert usage.tool_errors == 1

    def test_dispatch_ok_counts_call_only(self):
        monitor = Monitor()
        monitor.process_event(event("dispatch", status="ok", tool="t"))
        usage = monitor.ledger.section("s1")
        assert usage.tool_calls == 1
        assert usage.tool_errors == 0

    def test_append_accumulates_usage(self):
        monitor = Monitor()
        monitor.process_event(
            event("append", backend_call=True, prompt_tokens=7, completion_tokens=3)
        )
        usage = monitor.ledger.section("s1")
        assert usage.backend_calls == 1
        assert usage.prompt_tokens == 7
        assert usage.completion_tokens == 3

    def test_append_over_budget_requests_pop(self):
        # Oracle: the estimate is carried in the payload; anything above the
        # configured budget must produce exactly one pop request.
        monitor = Monitor(token_budget=100)
        actions = monitor.process_event(event("append", token_estimate=101))
        assert [a.kind for a in actions] == [ACTION_REQUEST_POP]
        assert monitor.process_event(event("append", token_estimate=100)) == []

    def test_unknown_kind_warns_without_ledger_change(self):
        monitor = Monitor()
        actions = monitor.process_event(event("explode"))
        assert [a.kind for a in actions] == [ACTION_WARN]
        assert monitor.ledger.totals().backend_calls == 0

    def test_terminate_closes_section(self):
        monitor = Monitor()
        monitor.process_event(event("terminate", cause="completed"))
        actions = monitor.process_event(event("dispatch", status="ok"))
        assert [a.kind for a in actions] == [ACTION_WARN]
        assert monitor.ledger.section("s1").tool_calls == 0

    def test_terminate_with_assets_requests_record(self):
        monitor = Monitor()
        actions = monitor.process_event(
            event("terminate", cause="completed", assets=["func", "test_func"])
        )
        assert [a.kind for a in actions] == [ACTION_RECORD_ASSET]
        assert "func" in actions[0].message

    def test_warning_collected(self):
        monitor = Monitor()
        monitor.process_event(event("warning", message="be careful"))
        assert monitor.warnings == ["s1: be careful"]


class TestEventWriter:
    def test_jsonl_shape(self, tmp_path):
        path = tmp_path / "events.jsonl"
        writer = JsonlEventWriter(path)
        writer(make_event("s1", "append", {"role": "user"}))
        writer(make_event("s1", "terminate", {"cause": "completed"}))
        lines = [json.loads(l) for l in path.read_text().splitlines()]
        assert lines[0]["section"] == "s1"
        assert lines[0]["event"] == "append"
        assert set(lines[0]) == {"ts", "section", "event", "payload"}


def make_states() -> dict[str, SectionState]:
    states = {}
    for sid in ("s1", "s2", "s3"):
        state = SectionState(section_id=sid)
        state.status = "completed"
        state.iterations = 4
        state.assets = {"func": f"body of {sid}"}
        states[sid] = state
    return states


def make_ledger() -> UsageLedger:
    ledger = UsageLedger()
    for index, sid in enumerate(("s1", "s2", "s3"), start=1):
        usage = ledger.section(sid)
        usage.prompt_tokens = 100 * index
        usage.completion_tokens = 10 * index
        usage.backend_calls = index
        usage.tool_calls = index
    return ledger


class TestFinalizeRun:
    def test_summary_lists_all_sections(self, tmp_path):
        path = finalize_run(make_states(), make_ledger(), tmp_path)
        summary = json.loads(path.read_text())
        assert [s["status"] for s in summary["sections"].values()] == ["completed"] * 3

    def test_totals_match_ledger(self, tmp_path):
        # Oracle: independent sum over the per-section counters.
        ledger = make_ledger()
        path = finalize_run(make_states(), ledger, tmp_path)
        summary = json.loads(path.read_text())
        expected = {
            key: sum(usage.to_dict()[key] for usage in ledger.per_section.values())
            for key in summary["usage"]
        }
        assert summary["usage"] == expected

    def test_assets_copied(self, tmp_path):
        finalize_run(make_states(), make_ledger(), tmp_path)
        assert (tmp_path / "assets" / "s1" / "func").read_text() == "body of s1"

    def test_rerun_byte_identical_outside_timestamp(self, tmp_path):
        # Oracle: diff excluding the generated_at header line.
        first = finalize_run(make_states(), make_ledger(), tmp_path / "a")
        second = finalize_run(make_states(), make_ledger(), tmp_path / "b")
        strip = lambda text: [
            line for line in text.splitlines() if '"generated_at"' not in line
        ]
        assert strip(first.read_text()) == strip(second.read_text())
        assert any('"generated_at"' in l for l in first.read_text().splitlines())

    def test_unwritable_out_dir_fails_before_write(self, tmp_path):
        # A regular file where the directory should go makes it unwritable
        # even for root.
        blocked = tmp_path / "blocked"
        blocked.write_text("in the way")
        with pytest.raises(OSError):
            finalize_run(make_states(), make_ledger(), blocked)
        assert blocked.read_text() == "in the way"
