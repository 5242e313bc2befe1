from __future__ import annotations

import random
import string

import pytest

from jobloop.tools import (
    CompletionFlag,
    ToolCall,
    ToolDescriptor,
    ToolFailure,
    ToolOutput,
    ToolParam,
    ToolRegistry,
    ToolResult,
)


def simple_registry() -> ToolRegistry:
    registry = ToolRegistry()
    registry.register(
        ToolDescriptor(
            "get_prompt",
            "Returns the prompt for the given task.",
            (ToolParam("task_id", "string", 'The task id, including the "HumanEval/" prefix.'),),
        ),
        lambda task_id: f"prompt for {task_id}",
    )
    return registry


class TestRegistration:
    def test_register_lists_descriptor(self):
        registry = simple_registry()
        assert [d.name for d in registry.describe_tools()] == [
            "get_prompt",
            "complete_section",
        ]

    def test_duplicate_name_rejected(self):
        registry = simple_registry()
        with pytest.raises(ValueError, match="already registered"):
            registry.register(
                ToolDescriptor("get_prompt", "dup"), lambda: "x"
            )

    def test_builtin_only(self):
        assert [d.name for d in ToolRegistry().describe_tools()] == ["complete_section"]

    def test_registration_order_preserved(self):
        registry = ToolRegistry()
        names = [f"tool_{i}" for i in range(5)]
        for name in names:
            registry.register(ToolDescriptor(name, "d"), lambda: "x")
        assert [d.name for d in registry.describe_tools()] == names + ["complete_section"]

    def test_wire_shape(self):
        descriptor = ToolDescriptor(
            "run_tests",
            "Runs tests.",
            (
                ToolParam("func", "string", "code", required=True),
                ToolParam("limit", "integer", "cap", required=False),
                ToolParam("opts", "map", "options", required=False),
            ),
        )
        wire = descriptor.to_wire()
        assert wire["type"] == "function"
        fn = wire["function"]
        assert fn["name"] == "run_tests"
        assert fn["parameters"]["properties"]["func"] == {
            "type": "string",
            "description": "code",
        }
        assert fn["parameters"]["properties"]["opts"]["type"] == "object"
        assert fn["parameters"]["required"] == ["func"]


class TestDispatch:
    def test_ok_path(self):
        registry = simple_registry()
        result = registry.dispatch_tool_call(
            ToolCall("c1", "get_prompt", {"task_id": "HumanEval/2"}), "HumanEval/2"
        )
        assert result.status == "ok"
        assert result.content == "prompt for HumanEval/2"

    def test_unknown_tool(self):
        result = simple_registry().dispatch_tool_call(
            ToolCall("c1", "frobnicate", {}), "s"
        )
        assert result.status == "tool_error"
        assert "unknown tool frobnicate" in result.content

    def test_missing_required_argument_named(self):
        registry = ToolRegistry()
        registry.register(
            ToolDescriptor(
                "run_tests",
                "Runs tests.",
                (
                    ToolParam("func", "string", "code"),
                    ToolParam("test_func", "string", "tests"),
                ),
            ),
            lambda func, test_func: "ok",
        )
        result = registry.dispatch_tool_call(
            ToolCall("c1", "run_tests", {"func": "def f(): pass"}), "s"
        )
        assert result.status == "tool_error"
        assert result.content == "ERROR: Missing 'test_func' argument in tool call"

    def test_type_mismatch(self):
        registry = simple_registry()
        result = registry.dispatch_tool_call(
            ToolCall("c1", "get_prompt", {"task_id": 7}), "s"
        )
        assert result.status == "tool_error"
        assert "task_id" in result.content and "string" in result.content

    def test_extra_arguments_ignored_with_warning(self):
        registry = simple_registry()
        result = registry.dispatch_tool_call(
            ToolCall("c1", "get_prompt", {"task_id": "x", "bogus": 1}), "s"
        )
        assert result.status == "ok"
        assert "ignored unknown arguments: bogus" in result.content

    def test_tool_failure_becomes_tool_error(self):
        registry = ToolRegistry()

        def boom() -> str:
            raise ToolFailure("executor unavailable")

        registry.register(ToolDescriptor("boom", "fails"), boom)
        result = registry.dispatch_tool_call(ToolCall("c1", "boom", {}), "s")
        assert result.status == "tool_error"
        assert result.content == "ERROR: executor unavailable"

    def test_raising_impl_contained_with_reason(self):
        registry = ToolRegistry()

        def broken() -> str:
            raise RuntimeError("kaput")

        registry.register(ToolDescriptor("broken", "raises"), broken)
        result = registry.dispatch_tool_call(ToolCall("c1", "broken", {}), "s")
        assert result.status == "tool_error"
        assert "RuntimeError" in result.content and "kaput" in result.content

    def test_section_injection(self):
        registry = ToolRegistry()
        registry.register(
            ToolDescriptor("where", "reports section"),
            lambda _section: f"running {_section}",
        )
        result = registry.dispatch_tool_call(ToolCall("c1", "where", {}), "sec-9")
        assert result.content == "running sec-9"

    def test_tool_output_assets_forwarded(self):
        registry = ToolRegistry()
        registry.register(
            ToolDescriptor("save", "saves"),
            lambda: ToolOutput("saved", assets={"blob": "data"}),
        )
        result = registry.dispatch_tool_call(ToolCall("c1", "save", {}), "s")
        assert result.status == "ok"
        assert result.assets == {"blob": "data"}

    def test_non_string_returns_rendered(self):
        registry = ToolRegistry()
        registry.register(
            ToolDescriptor("names", "returns a map"),
            lambda: {"example": "Led Zeppelin", "target": "Jonas Brothers"},
        )
        result = registry.dispatch_tool_call(ToolCall("c1", "names", {}), "s")
        assert result.content == '{"example": "Led Zeppelin", "target": "Jonas Brothers"}'

    def test_round_trip_arguments_reach_impl(self):
        # Round-trip invariant: type-correct synthetic calls deliver exactly
        # the argument values.
        registry = ToolRegistry()
        seen: dict = {}

        def spy(a, b, c, d, e, f):
            seen.update(a=a, b=b, c=c, d=d, e=e, f=f)
            return "ok"

        registry.register(
            ToolDescriptor(
                "spy",
                "records arguments",
                (
                    ToolParam("a", "string", ""),
                    ToolParam("b", "integer", ""),
                    ToolParam("c", "number", ""),
                    ToolParam("d", "boolean", ""),
                    ToolParam("e", "list", ""),
                    ToolParam("f", "map", ""),
                ),
            ),
            spy,
        )
        arguments = {
            "a": "text",
            "b": 3,
            "c": 2.5,
            "d": True,
            "e": [1, "two"],
            "f": {"k": "v"},
        }
        result = registry.dispatch_tool_call(ToolCall("c1", "spy", arguments), "s")
        assert result.status == "ok"
        assert seen == arguments

    def test_dispatch_totality_fuzz(self):
        # Totality: every possible call yields a ToolResult, never a crash.
        registry = simple_registry()
        rng = random.Random(42)
        values = [None, 0, 1.5, True, "x", [], {}, {"task_id": None}, {"task_id": []}]
        for i in range(300):
            name = rng.choice(
                ["get_prompt", "complete_section", "missing", ""]
                + ["".join(rng.choices(string.ascii_letters, k=5))]
            )
            arguments = rng.choice(values)
            call = ToolCall(f"c{i}", name, arguments if isinstance(arguments, dict) else {"arg": arguments})
            result = registry.dispatch_tool_call(call, "s")
            assert isinstance(result, ToolResult)
            assert result.status in ("ok", "tool_error")


class TestCompleteSection:
    def test_matching_id_sets_flag(self):
        flag = CompletionFlag()
        result = ToolRegistry().dispatch_tool_call(
            ToolCall("c1", "complete_section", {"current_section_identifier": "HumanEval/2"}),
            "HumanEval/2",
            flag,
        )
        assert result.status == "ok"
        assert flag.is_set

    def test_mismatched_id_leaves_flag_unset(self):
        flag = CompletionFlag()
        result = ToolRegistry().dispatch_tool_call(
            ToolCall("c1", "complete_section", {"current_section_identifier": "other"}),
            "mine",
            flag,
        )
        assert result.status == "tool_error"
        assert not flag.is_set

    def test_missing_identifier_completes_running_section(self):
        # The recorded episodes call complete_section with no argument.
        flag = CompletionFlag()
        result = ToolRegistry().dispatch_tool_call(
            ToolCall("c1", "complete_section", {}), "s", flag
        )
        assert result.status == "ok"
        assert flag.is_set

    def test_list_wrapped_identifier_accepted(self):
        flag = CompletionFlag()
        result = ToolRegistry().dispatch_tool_call(
            ToolCall("c1", "complete_section", {"current_section_identifier": ["1.2"]}),
            "1.2",
            flag,
        )
        assert result.status == "ok"
        assert flag.is_set

    def test_second_call_idempotent(self):
        # Oracle: the flag is boolean; replay twice, assert a single transition.
        flag = CompletionFlag()
        registry = ToolRegistry()
        call = ToolCall("c1", "complete_section", {"current_section_identifier": "s"})
        first = registry.dispatch_tool_call(call, "s", flag)
        was_set = flag.is_set
        second = registry.dispatch_tool_call(call, "s", flag)
        assert first.status == second.status == "ok"
        assert was_set and flag.is_set


class TestToolResultInvariant:
    def test_tool_error_must_start_with_error(self):
        with pytest.raises(ValueError):
            ToolResult("c", "tool_error", "missing prefix")

    def test_ok_content_free_form(self):
        assert ToolResult("c", "ok", "anything").content == "anything"
