"""Chat turns, backend requests/responses, and request fingerprinting."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

from jobloop.tools import ToolCall, ToolDescriptor

ROLES = ("system", "user", "assistant", "tool")


@dataclass(frozen=True)
class Turn:
    """One chat message in a section transcript."""

    role: str
    content: str
    tool_calls: tuple[ToolCall, ...] = ()
    call_id: str | None = None

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.tool_calls and self.role != "assistant":
            raise ValueError("only assistant turns carry tool calls")
        if self.role == "tool" and not self.call_id:
            raise ValueError("tool turns must carry the call_id they answer")


@dataclass(frozen=True)
class TokenUsage:
    prompt_tokens: int = 0
    completion_tokens: int = 0


@dataclass(frozen=True)
class ChatRequest:
    """One backend invocation: full transcript plus available tools."""

    model_id: str
    turns: tuple[Turn, ...]
    tool_descriptors: tuple[ToolDescriptor, ...] = ()
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if not self.turns:
            raise ValueError("a request needs at least one turn")
        if self.turns[0].role != "system":
            raise ValueError("the first turn must be the system message")


@dataclass(frozen=True)
class ChatResponse:
    assistant_text: str = ""
    tool_calls: tuple[ToolCall, ...] = ()
    token_usage: TokenUsage = field(default_factory=TokenUsage)

    def __post_init__(self) -> None:
        if not self.assistant_text and not self.tool_calls:
            raise ValueError("a response needs text or tool calls")


def fingerprint(request: ChatRequest) -> str:
    """Stable 256-bit content hash of a request, as lowercase hex.

    Covers model id, temperature, every turn's role and content in order, and
    tool descriptor names in order. Descriptor descriptions are deliberately
    excluded so documentation edits do not invalidate caches or recordings.
    """
    payload = {
        "model": request.model_id,
        "temperature": request.temperature,
        "turns": [[t.role, t.content] for t in request.turns],
        "tools": [d.name for d in request.tool_descriptors],
    }
    raw = json.dumps(payload, ensure_ascii=True, separators=(",", ":"))
    return hashlib.sha256(raw.encode("utf-8")).hexdigest()


# --- plain-dict (de)serialization, used by transcripts, recordings, caches ---


def tool_call_to_dict(call: ToolCall) -> dict[str, Any]:
    return {"call_id": call.call_id, "name": call.name, "arguments": call.arguments}


def tool_call_from_dict(data: dict[str, Any]) -> ToolCall:
    return ToolCall(
        call_id=data["call_id"],
        name=data["name"],
        arguments=dict(data.get("arguments") or {}),
    )


def turn_to_dict(turn: Turn) -> dict[str, Any]:
    data: dict[str, Any] = {"role": turn.role, "content": turn.content}
    if turn.tool_calls:
        data["tool_calls"] = [tool_call_to_dict(c) for c in turn.tool_calls]
    if turn.call_id is not None:
        data["call_id"] = turn.call_id
    return data


def turn_from_dict(data: dict[str, Any]) -> Turn:
    return Turn(
        role=data["role"],
        content=data["content"],
        tool_calls=tuple(tool_call_from_dict(c) for c in data.get("tool_calls", [])),
        call_id=data.get("call_id"),
    )


def response_to_dict(response: ChatResponse) -> dict[str, Any]:
    return {
        "assistant_text": response.assistant_text,
        "tool_calls": [tool_call_to_dict(c) for c in response.tool_calls],
        "token_usage": {
            "prompt_tokens": response.token_usage.prompt_tokens,
            "completion_tokens": response.token_usage.completion_tokens,
        },
    }


def response_from_dict(data: dict[str, Any]) -> ChatResponse:
    usage = data.get("token_usage") or {}
    return ChatResponse(
        assistant_text=data.get("assistant_text", ""),
        tool_calls=tuple(tool_call_from_dict(c) for c in data.get("tool_calls", [])),
        token_usage=TokenUsage(
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
        ),
    )


def transcript_to_text(turns: list[Turn] | tuple[Turn, ...]) -> str:
    """Canonical JSON rendering of a transcript, for comparison and storage."""
    return json.dumps(
        [turn_to_dict(t) for t in turns], ensure_ascii=False, indent=2
    ) + "\n"
