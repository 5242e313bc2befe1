"""Tool descriptors, registration, and dispatch.

A :class:`ToolRegistry` holds the functions a model may invoke via structured
tool calls. Dispatch is total: every call yields a :class:`ToolResult`, never
an exception, so tool failures stay inside the section transcript.
"""

from __future__ import annotations

import inspect
import json
import threading
from dataclasses import dataclass, field
from typing import Any, Callable

SEMANTIC_TYPES = ("string", "integer", "number", "boolean", "list", "map")

_JSON_TYPE = {
    "string": "string",
    "integer": "integer",
    "number": "number",
    "boolean": "boolean",
    "list": "array",
    "map": "object",
}


@dataclass(frozen=True)
class ToolParam:
    name: str
    type: str
    description: str = ""
    required: bool = True

    def __post_init__(self) -> None:
        if self.type not in SEMANTIC_TYPES:
            raise ValueError(f"unknown parameter type {self.type!r}")


@dataclass(frozen=True)
class ToolDescriptor:
    """Schema of one dispatchable tool."""

    name: str
    description: str
    params: tuple[ToolParam, ...] = ()

    def __post_init__(self) -> None:
        if not self.description:
            raise ValueError(f"tool {self.name!r} needs a non-empty description")

    def to_wire(self) -> dict[str, Any]:
        """Render in the chat-completions function-schema shape."""
        properties = {
            p.name: {"type": _JSON_TYPE[p.type], "description": p.description}
            for p in self.params
        }
        return {
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": {
                    "type": "object",
                    "properties": properties,
                    "required": [p.name for p in self.params if p.required],
                },
            },
        }


@dataclass(frozen=True)
class ToolCall:
    """One structured invocation parsed from a backend response."""

    call_id: str
    name: str
    arguments: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ToolResult:
    """Outcome of dispatching one tool call."""

    call_id: str
    status: str  # "ok" | "tool_error"
    content: str
    assets: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.status not in ("ok", "tool_error"):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == "tool_error" and not self.content.startswith("ERROR:"):
            raise ValueError("tool_error content must begin with 'ERROR:'")


@dataclass(frozen=True)
class ToolOutput:
    """Return type for implementations that also persist assets."""

    content: Any
    assets: dict[str, str] = field(default_factory=dict)


class ToolFailure(Exception):
    """Raised by tool implementations to signal a handled tool error."""


class CompletionFlag:
    """Per-section latch set by the built-in complete_section tool."""

    def __init__(self) -> None:
        self._event = threading.Event()

    def set(self) -> None:
        self._event.set()

    @property
    def is_set(self) -> bool:
        return self._event.is_set()


COMPLETE_SECTION = ToolDescriptor(
    name="complete_section",
    description=(
        "Signal that every task for the current section is finished. Call this "
        "exactly once, after all other tasks are done."
    ),
    params=(
        ToolParam(
            "current_section_identifier",
            "string",
            "The identifier of the section being completed.",
            required=False,
        ),
    ),
)


def _type_ok(kind: str, value: Any) -> bool:
    if kind == "string":
        return isinstance(value, str)
    if kind == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == "boolean":
        return isinstance(value, bool)
    if kind == "list":
        return isinstance(value, (list, tuple))
    if kind == "map":
        return isinstance(value, dict)
    return False


def render_tool_value(value: Any) -> str:
    """Canonical string rendering of a tool return value."""
    if isinstance(value, str):
        return value
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(value, ensure_ascii=False)
    return str(value)


@dataclass
class _Registered:
    descriptor: ToolDescriptor
    impl: Callable[..., Any]
    wants_section: bool
    lock: threading.Lock | None  # present only for serialized tools


class ToolRegistry:
    """Registration-ordered set of tools plus the built-in complete_section.

    The registry is meant to be fully populated before a run starts and is
    never mutated afterwards; dispatch is safe from concurrent sections.
    """

    def __init__(self) -> None:
        self._tools: dict[str, _Registered] = {}

    def register(
        self,
        descriptor: ToolDescriptor,
        impl: Callable[..., Any],
        serialized: bool = False,
    ) -> None:
        """Add a tool. `serialized` queues invocations behind a per-tool lock."""
        if descriptor.name in self._tools or descriptor.name == COMPLETE_SECTION.name:
            raise ValueError(f"tool {descriptor.name!r} is already registered")
        wants_section = "_section" in inspect.signature(impl).parameters
        self._tools[descriptor.name] = _Registered(
            descriptor, impl, wants_section, threading.Lock() if serialized else None
        )

    def describe_tools(self) -> list[ToolDescriptor]:
        """All descriptors in registration order; complete_section always last."""
        return [r.descriptor for r in self._tools.values()] + [COMPLETE_SECTION]

    def dispatch_tool_call(
        self,
        call: ToolCall,
        section_id: str,
        completion: CompletionFlag | None = None,
    ) -> ToolResult:
        """Route one call; total — any failure becomes a tool_error result."""
        try:
            return self._dispatch(call, section_id, completion)
        except Exception as exc:  # defensive: dispatch must never abort a run
            return ToolResult(
                call.call_id, "tool_error", f"ERROR: internal dispatch failure: {exc}"
            )

    def _dispatch(
        self, call: ToolCall, section_id: str, completion: CompletionFlag | None
    ) -> ToolResult:
        if call.name == COMPLETE_SECTION.name:
            return self._complete_section(call, section_id, completion)

        registered = self._tools.get(call.name)
        if registered is None:
            return ToolResult(
                call.call_id, "tool_error", f"ERROR: unknown tool {call.name}"
            )

        arguments = call.arguments if isinstance(call.arguments, dict) else {}
        descriptor = registered.descriptor
        known = {p.name for p in descriptor.params}

        for param in descriptor.params:
            if param.required and param.name not in arguments:
                return ToolResult(
                    call.call_id,
                    "tool_error",
                    f"ERROR: Missing '{param.name}' argument in tool call",
                )
            if param.name in arguments and not _type_ok(
                param.type, arguments[param.name]
            ):
                got = type(arguments[param.name]).__name__
                return ToolResult(
                    call.call_id,
                    "tool_error",
                    f"ERROR: argument '{param.name}' expected {param.type}, got {got}",
                )

        ignored = sorted(k for k in arguments if k not in known)
        kwargs = {k: v for k, v in arguments.items() if k in known}
        if registered.wants_section:
            kwargs["_section"] = section_id

        try:
            if registered.lock is not None:
                with registered.lock:
                    value = registered.impl(**kwargs)
            else:
                value = registered.impl(**kwargs)
        except ToolFailure as exc:
            return ToolResult(call.call_id, "tool_error", f"ERROR: {exc}")
        except Exception as exc:
            return ToolResult(
                call.call_id, "tool_error", f"ERROR: {type(exc).__name__}: {exc}"
            )

        assets: dict[str, str] = {}
        if isinstance(value, ToolOutput):
            assets = dict(value.assets)
            value = value.content
        content = render_tool_value(value)
        if ignored:
            content += f"\n[warning] ignored unknown arguments: {', '.join(ignored)}"
        return ToolResult(call.call_id, "ok", content, assets)

    def _complete_section(
        self, call: ToolCall, section_id: str, completion: CompletionFlag | None
    ) -> ToolResult:
        arguments = call.arguments if isinstance(call.arguments, dict) else {}
        ident = arguments.get("current_section_identifier")
        # Models pass the id as a one-element list at times; unwrap it.
        if isinstance(ident, (list, tuple)) and len(ident) == 1:
            ident = ident[0]
        if ident is not None and str(ident) != section_id:
            return ToolResult(
                call.call_id,
                "tool_error",
                f"ERROR: complete_section called for {ident!r} while running "
                f"section {section_id!r}",
            )
        if completion is not None:
            completion.set()
        return ToolResult(call.call_id, "ok", f"Section {section_id} marked complete.")
