"""Chat-completion backends: live HTTP, scripted replay, caching, recording.

The engine only ever sees the ``complete(request) -> ChatResponse`` surface,
so backends are freely interchangeable; a scripted backend fed a recorded run
reproduces it exactly.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from collections import deque
from pathlib import Path
from typing import Any, Callable, Iterable, Protocol

import httpx

from jobloop.chat import (
    ChatRequest,
    ChatResponse,
    TokenUsage,
    ToolCall,
    fingerprint,
    response_from_dict,
    response_to_dict,
)
from jobloop.monitor import estimate_tokens

logger = logging.getLogger(__name__)


class BackendError(Exception):
    """Non-retryable backend failure."""


class RetryableBackendError(BackendError):
    """Transient transport failure; the engine may retry with backoff."""


class ReplayDivergenceError(BackendError):
    """The incoming request does not match the loaded replay script."""


class Backend(Protocol):
    def complete(self, request: ChatRequest) -> ChatResponse: ...


def _estimate_usage(request: ChatRequest, response: ChatResponse) -> TokenUsage:
    prompt = sum(estimate_tokens(t.content) for t in request.turns)
    completion = estimate_tokens(response.assistant_text) + sum(
        estimate_tokens(c.name) + estimate_tokens(json.dumps(c.arguments, sort_keys=True))
        for c in response.tool_calls
    )
    return TokenUsage(prompt_tokens=prompt, completion_tokens=completion)


class EchoBackend:
    """Fixed-text stub; handy for smoke tests and wiring checks."""

    def __init__(self, text: str = "ok") -> None:
        self.text = text
        self.calls = 0

    def complete(self, request: ChatRequest) -> ChatResponse:
        self.calls += 1
        response = ChatResponse(assistant_text=self.text)
        return ChatResponse(
            assistant_text=response.assistant_text,
            token_usage=_estimate_usage(request, response),
        )


class QueueBackend:
    """Replays a fixed response sequence regardless of request content.

    Used to puppet the engine when authoring recordings and in tests. With
    ``attach_usage`` the responses get deterministic estimator-based usage.
    """

    def __init__(self, responses: Iterable[ChatResponse], attach_usage: bool = True) -> None:
        self._responses: deque[ChatResponse] = deque(responses)
        self._attach_usage = attach_usage
        self._lock = threading.Lock()
        self.requests: list[ChatRequest] = []

    def complete(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            if not self._responses:
                raise BackendError("queue backend exhausted")
            response = self._responses.popleft()
            self.requests.append(request)
        if self._attach_usage:
            response = ChatResponse(
                assistant_text=response.assistant_text,
                tool_calls=response.tool_calls,
                token_usage=_estimate_usage(request, response),
            )
        return response


class ReplayScript:
    """Ordered (fingerprint, response) records loaded from a JSONL file."""

    def __init__(self, records: list[tuple[str, ChatResponse]]) -> None:
        self.records = records

    @classmethod
    def load(cls, path: str | Path) -> "ReplayScript":
        records: list[tuple[str, ChatResponse]] = []
        with open(path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    data = json.loads(line)
                    records.append(
                        (data["fingerprint"], response_from_dict(data["response"]))
                    )
                except (json.JSONDecodeError, KeyError) as exc:
                    raise BackendError(f"bad replay record on line {line_no}: {exc}")
        return cls(records)

    def save(self, path: str | Path) -> None:
        write_records(self.records, path)


def write_records(records: list[tuple[str, ChatResponse]], path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for fp, response in records:
            handle.write(
                json.dumps(
                    {"fingerprint": fp, "response": response_to_dict(response)},
                    ensure_ascii=False,
                )
                + "\n"
            )


class ScriptedBackend:
    """Serves recorded responses matched by request fingerprint.

    Records with equal fingerprints form a FIFO queue, so repeated identical
    requests replay in recorded order while concurrent sections can consume
    their own records in any interleaving.
    """

    def __init__(self, script: ReplayScript) -> None:
        self._queues: dict[str, deque[ChatResponse]] = {}
        self._pending: list[str] = []
        for fp, response in script.records:
            self._queues.setdefault(fp, deque()).append(response)
            self._pending.append(fp)
        self._lock = threading.Lock()
        self.consumed: list[tuple[str, ChatResponse]] = []

    def complete(self, request: ChatRequest) -> ChatResponse:
        fp = fingerprint(request)
        with self._lock:
            queue = self._queues.get(fp)
            if not queue:
                head = self._pending[0] if self._pending else "<none>"
                raise ReplayDivergenceError(
                    f"replay divergence: expected fingerprint {head}, got {fp} "
                    f"({len(self._pending)} recorded responses unconsumed)"
                )
            response = queue.popleft()
            self._pending.remove(fp)
            self.consumed.append((fp, response))
            return response

    @property
    def remaining(self) -> int:
        with self._lock:
            return len(self._pending)


class CacheStore:
    """JSONL-backed response cache keyed by request fingerprint."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._entries: dict[str, ChatResponse] = {}
        self._lock = threading.Lock()
        if self.path.exists():
            with open(self.path, encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if not line:
                        continue
                    data = json.loads(line)
                    self._entries[data["fingerprint"]] = response_from_dict(
                        data["response"]
                    )

    def get(self, fp: str) -> ChatResponse | None:
        with self._lock:
            return self._entries.get(fp)

    def put(self, fp: str, response: ChatResponse) -> None:
        with self._lock:
            self._entries[fp] = response
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(
                    json.dumps(
                        {"fingerprint": fp, "response": response_to_dict(response)},
                        ensure_ascii=False,
                    )
                    + "\n"
                )


class InMemoryCacheStore:
    """Cache store without persistence; same surface as CacheStore."""

    def __init__(self) -> None:
        self._entries: dict[str, ChatResponse] = {}
        self._lock = threading.Lock()

    def get(self, fp: str) -> ChatResponse | None:
        with self._lock:
            return self._entries.get(fp)

    def put(self, fp: str, response: ChatResponse) -> None:
        with self._lock:
            self._entries[fp] = response


class CachedBackend:
    """Serves repeated requests from the store; N identical requests cost one call.

    Store failures degrade to uncached calls with a warning rather than
    failing the run.
    """

    def __init__(
        self,
        inner: Backend,
        store: CacheStore | InMemoryCacheStore,
        enabled: bool = True,
        warn: Callable[[str], None] | None = None,
    ) -> None:
        self.inner = inner
        self.store = store
        self.enabled = enabled
        self._warn = warn or (lambda msg: logger.warning(msg))

    def complete(self, request: ChatRequest) -> ChatResponse:
        if not self.enabled:
            return self.inner.complete(request)
        fp = fingerprint(request)
        try:
            hit = self.store.get(fp)
        except Exception as exc:
            self._warn(f"cache read failed, serving uncached: {exc}")
            return self.inner.complete(request)
        if hit is not None:
            return hit
        response = self.inner.complete(request)
        try:
            self.store.put(fp, response)
        except Exception as exc:
            self._warn(f"cache write failed: {exc}")
        return response


class RecordingBackend:
    """Wraps a backend and records every exchange for later replay."""

    def __init__(self, inner: Backend, path: str | Path | None = None) -> None:
        self.inner = inner
        self.path = Path(path) if path else None
        self.records: list[tuple[str, ChatResponse]] = []
        self._lock = threading.Lock()
        if self.path and self.path.exists():
            self.path.unlink()

    def complete(self, request: ChatRequest) -> ChatResponse:
        fp = fingerprint(request)
        response = self.inner.complete(request)
        with self._lock:
            self.records.append((fp, response))
            if self.path:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as handle:
                    handle.write(
                        json.dumps(
                            {
                                "fingerprint": fp,
                                "response": response_to_dict(response),
                            },
                            ensure_ascii=False,
                        )
                        + "\n"
                    )
        return response


def _turn_to_message(turn) -> dict[str, Any]:
    if turn.role == "assistant" and turn.tool_calls:
        return {
            "role": "assistant",
            "content": turn.content or None,
            "tool_calls": [
                {
                    "id": call.call_id,
                    "type": "function",
                    "function": {
                        "name": call.name,
                        "arguments": json.dumps(call.arguments, ensure_ascii=False),
                    },
                }
                for call in turn.tool_calls
            ],
        }
    if turn.role == "tool":
        return {"role": "tool", "tool_call_id": turn.call_id, "content": turn.content}
    return {"role": turn.role, "content": turn.content}


def _parse_wire_tool_call(data: dict[str, Any]) -> ToolCall:
    function = data.get("function") or {}
    raw_args = function.get("arguments") or "{}"
    try:
        arguments = json.loads(raw_args)
        if not isinstance(arguments, dict):
            arguments = {"_raw": raw_args}
    except json.JSONDecodeError:
        arguments = {"_raw": raw_args}
    return ToolCall(
        call_id=data.get("id", ""), name=function.get("name", ""), arguments=arguments
    )


class LiveBackend:
    """Chat-completions HTTP backend (OpenAI-style wire format).

    Credentials and endpoint come from the environment only; they are never
    written to replay or cache files.
    """

    RETRYABLE_STATUS = (408, 409, 429, 500, 502, 503, 504)

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        timeout_s: float = 120.0,
        client: httpx.Client | None = None,
    ) -> None:
        self.base_url = (
            base_url
            or os.environ.get("JOBLOOP_API_BASE")
            or os.environ.get("OPENAI_BASE_URL")
            or "https://api.openai.com/v1"
        ).rstrip("/")
        self.api_key = (
            api_key
            or os.environ.get("JOBLOOP_API_KEY")
            or os.environ.get("OPENAI_API_KEY")
            or ""
        )
        self._client = client or httpx.Client(timeout=timeout_s)

    def build_payload(self, request: ChatRequest) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "model": request.model_id,
            "temperature": request.temperature,
            "messages": [_turn_to_message(t) for t in request.turns],
        }
        if request.tool_descriptors:
            payload["tools"] = [d.to_wire() for d in request.tool_descriptors]
        return payload

    def parse_response(self, data: dict[str, Any]) -> ChatResponse:
        try:
            message = data["choices"][0]["message"]
        except (KeyError, IndexError) as exc:
            raise BackendError(f"malformed backend response: {exc}")
        usage = data.get("usage") or {}
        return ChatResponse(
            assistant_text=message.get("content") or "",
            tool_calls=tuple(
                _parse_wire_tool_call(c) for c in message.get("tool_calls") or []
            ),
            token_usage=TokenUsage(
                prompt_tokens=int(usage.get("prompt_tokens", 0)),
                completion_tokens=int(usage.get("completion_tokens", 0)),
            ),
        )

    def complete(self, request: ChatRequest) -> ChatResponse:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            http_response = self._client.post(
                f"{self.base_url}/chat/completions",
                json=self.build_payload(request),
                headers=headers,
            )
        except httpx.HTTPError as exc:
            raise RetryableBackendError(f"transport failure: {exc}")
        if http_response.status_code in self.RETRYABLE_STATUS:
            raise RetryableBackendError(
                f"backend returned status {http_response.status_code}"
            )
        if http_response.status_code != 200:
            raise BackendError(
                f"backend returned status {http_response.status_code}: "
                f"{http_response.text[:500]}"
            )
        return self.parse_response(http_response.json())
