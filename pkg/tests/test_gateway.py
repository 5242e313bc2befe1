from __future__ import annotations

import json
import random

import httpx
import pytest

from jobloop.backends import (
    BackendError,
    CachedBackend,
    CacheStore,
    EchoBackend,
    InMemoryCacheStore,
    LiveBackend,
    QueueBackend,
    RecordingBackend,
    ReplayDivergenceError,
    ReplayScript,
    RetryableBackendError,
    ScriptedBackend,
)
from jobloop.chat import (
    ChatRequest,
    ChatResponse,
    TokenUsage,
    Turn,
    fingerprint,
    response_from_dict,
    response_to_dict,
)
from jobloop.tools import ToolCall, ToolDescriptor, ToolParam


def request(
    user: str = "hello",
    model: str = "m1",
    temperature: float = 0.0,
    tools: tuple[ToolDescriptor, ...] = (),
    extra_turns: tuple[Turn, ...] = (),
) -> ChatRequest:
    return ChatRequest(
        model_id=model,
        turns=(Turn("system", "sys"), Turn("user", user)) + extra_turns,
        tool_descriptors=tools,
        temperature=temperature,
    )


class CountingBackend:
    def __init__(self, text: str = "ok") -> None:
        self.calls = 0
        self.text = text

    def complete(self, req: ChatRequest) -> ChatResponse:
        self.calls += 1
        return ChatResponse(assistant_text=f"{self.text}-{fingerprint(req)[:8]}")


class TestRequestInvariants:
    def test_first_turn_must_be_system(self):
        with pytest.raises(ValueError):
            ChatRequest("m", (Turn("user", "x"),))

    def test_turns_non_empty(self):
        with pytest.raises(ValueError):
            ChatRequest("m", ())

    def test_response_needs_text_or_calls(self):
        with pytest.raises(ValueError):
            ChatResponse()


class TestFingerprint:
    def test_equal_requests_equal_fingerprints(self):
        assert fingerprint(request()) == fingerprint(request())

    def test_swapping_turns_changes_fingerprint(self):
        # Oracle: serialize both, compare bytes.
        a = request(extra_turns=(Turn("user", "one"), Turn("user", "two")))
        b = request(extra_turns=(Turn("user", "two"), Turn("user", "one")))
        serialized_a = [(t.role, t.content) for t in a.turns]
        serialized_b = [(t.role, t.content) for t in b.turns]
        assert serialized_a != serialized_b
        assert fingerprint(a) != fingerprint(b)

    def test_tool_list_changes_fingerprint(self):
        tools = (ToolDescriptor("t", "desc"),)
        assert fingerprint(request()) != fingerprint(request(tools=tools))

    def test_temperature_changes_fingerprint(self):
        assert fingerprint(request(temperature=0.0)) != fingerprint(
            request(temperature=0.7)
        )

    def test_descriptor_description_excluded(self):
        a = (ToolDescriptor("t", "one wording", (ToolParam("p", "string", "x"),)),)
        b = (ToolDescriptor("t", "another wording", (ToolParam("p", "string", "y"),)),)
        assert fingerprint(request(tools=a)) == fingerprint(request(tools=b))

    def test_shape(self):
        fp = fingerprint(request())
        assert len(fp) == 64 and all(c in "0123456789abcdef" for c in fp)


class TestEchoAndQueue:
    def test_echo(self):
        response = EchoBackend("ok").complete(request())
        assert response.assistant_text == "ok"
        assert response.tool_calls == ()

    def test_queue_exhaustion(self):
        backend = QueueBackend([ChatResponse(assistant_text="a")])
        backend.complete(request())
        with pytest.raises(BackendError):
            backend.complete(request())


class TestScriptedBackend:
    def make_script(self, *pairs: tuple[ChatRequest, ChatResponse]) -> ReplayScript:
        return ReplayScript([(fingerprint(rq), rs) for rq, rs in pairs])

    def test_replays_by_fingerprint(self):
        rq = request("go")
        rs = ChatResponse(
            assistant_text="",
            tool_calls=(ToolCall("c1", "get_prompt", {"task_id": "HumanEval/2"}),),
        )
        backend = ScriptedBackend(self.make_script((rq, rs)))
        out = backend.complete(request("go"))
        assert out.tool_calls[0].name == "get_prompt"
        assert out.tool_calls[0].arguments == {"task_id": "HumanEval/2"}

    def test_mismatch_raises_divergence(self):
        backend = ScriptedBackend(
            self.make_script((request("expected"), ChatResponse(assistant_text="x")))
        )
        with pytest.raises(ReplayDivergenceError) as excinfo:
            backend.complete(request("surprise"))
        message = str(excinfo.value)
        assert fingerprint(request("expected")) in message
        assert fingerprint(request("surprise")) in message

    def test_repeated_identical_requests_fifo(self):
        rq = request("again")
        script = self.make_script(
            (rq, ChatResponse(assistant_text="first")),
            (rq, ChatResponse(assistant_text="second")),
        )
        backend = ScriptedBackend(script)
        assert backend.complete(rq).assistant_text == "first"
        assert backend.complete(rq).assistant_text == "second"
        assert backend.remaining == 0

    def test_round_trip_through_file(self, tmp_path):
        rq = request("persist")
        rs = ChatResponse(
            assistant_text="saved",
            tool_calls=(ToolCall("c9", "save", {"x": [1, 2]}),),
            token_usage=TokenUsage(10, 3),
        )
        script = self.make_script((rq, rs))
        path = tmp_path / "replay.jsonl"
        script.save(path)
        loaded = ReplayScript.load(path)
        assert [(fp, response_to_dict(r)) for fp, r in loaded.records] == [
            (fp, response_to_dict(r)) for fp, r in script.records
        ]


class TestCachedBackend:
    def test_hit_avoids_backend(self, tmp_path):
        inner = CountingBackend()
        backend = CachedBackend(inner, CacheStore(tmp_path / "cache.jsonl"))
        first = backend.complete(request("q"))
        second = backend.complete(request("q"))
        assert inner.calls == 1
        assert first == second

    def test_disabled_cache_passthrough(self, tmp_path):
        inner = CountingBackend()
        backend = CachedBackend(
            inner, CacheStore(tmp_path / "cache.jsonl"), enabled=False
        )
        backend.complete(request("q"))
        backend.complete(request("q"))
        assert inner.calls == 2

    def test_temperature_distinguishes_keys(self, tmp_path):
        # Oracle: fingerprint inequality check.
        assert fingerprint(request("q", temperature=0.0)) != fingerprint(
            request("q", temperature=0.5)
        )
        inner = CountingBackend()
        backend = CachedBackend(inner, CacheStore(tmp_path / "cache.jsonl"))
        backend.complete(request("q", temperature=0.0))
        backend.complete(request("q", temperature=0.5))
        assert inner.calls == 2

    def test_cache_persists_across_stores(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        inner = CountingBackend()
        CachedBackend(inner, CacheStore(path)).complete(request("q"))
        CachedBackend(inner, CacheStore(path)).complete(request("q"))
        assert inner.calls == 1

    def test_store_failure_degrades_with_warning(self):
        class BrokenStore:
            def get(self, fp):
                raise OSError("disk gone")

            def put(self, fp, response):
                raise OSError("disk gone")

        warnings: list[str] = []
        inner = CountingBackend()
        backend = CachedBackend(inner, BrokenStore(), warn=warnings.append)
        backend.complete(request("q"))
        backend.complete(request("q"))
        assert inner.calls == 2
        assert warnings and "cache read failed" in warnings[0]

    def test_invocations_equal_distinct_fingerprints(self):
        # Property: over any request multiset, backend invocations equal the
        # number of distinct fingerprints.
        rng = random.Random(11)
        inner = CountingBackend()
        backend = CachedBackend(inner, InMemoryCacheStore())
        pool = [request(f"q{i}", temperature=rng.choice([0.0, 0.5])) for i in range(12)]
        batch = [rng.choice(pool) for _ in range(80)]
        for rq in batch:
            backend.complete(rq)
        assert inner.calls == len({fingerprint(rq) for rq in batch})


class TestRecordingBackend:
    def test_records_in_order(self, tmp_path):
        path = tmp_path / "rec.jsonl"
        backend = RecordingBackend(CountingBackend(), path)
        backend.complete(request("one"))
        backend.complete(request("two"))
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 2
        assert json.loads(lines[0])["fingerprint"] == fingerprint(request("one"))

    def test_recording_replays_identically(self, tmp_path):
        path = tmp_path / "rec.jsonl"
        inner = CountingBackend()
        recorder = RecordingBackend(inner, path)
        responses = [recorder.complete(request(f"q{i}")) for i in range(3)]
        scripted = ScriptedBackend(ReplayScript.load(path))
        replayed = [scripted.complete(request(f"q{i}")) for i in range(3)]
        assert [response_to_dict(r) for r in responses] == [
            response_to_dict(r) for r in replayed
        ]


class TestLiveBackendWire:
    def make_backend(self, handler) -> LiveBackend:
        transport = httpx.MockTransport(handler)
        return LiveBackend(
            base_url="https://example.test/v1",
            api_key="k",
            client=httpx.Client(transport=transport),
        )

    def test_payload_shape_and_parse(self):
        captured = {}

        def handler(req: httpx.Request) -> httpx.Response:
            captured.update(json.loads(req.content))
            return httpx.Response(
                200,
                json={
                    "choices": [
                        {
                            "message": {
                                "content": None,
                                "tool_calls": [
                                    {
                                        "id": "call_9",
                                        "type": "function",
                                        "function": {
                                            "name": "run_tests",
                                            "arguments": '{"func": "def f(): pass"}',
                                        },
                                    }
                                ],
                            }
                        }
                    ],
                    "usage": {"prompt_tokens": 12, "completion_tokens": 5},
                },
            )

        backend = self.make_backend(handler)
        tools = (
            ToolDescriptor("run_tests", "Runs tests.", (ToolParam("func", "string", "f"),)),
        )
        assistant = Turn(
            "assistant", "", tool_calls=(ToolCall("c0", "get_prompt", {"task_id": "x"}),)
        )
        tool_turn = Turn("tool", "the prompt", call_id="c0")
        response = backend.complete(
            request(tools=tools, extra_turns=(assistant, tool_turn))
        )

        assert captured["model"] == "m1"
        assert captured["messages"][0] == {"role": "system", "content": "sys"}
        assert captured["messages"][2]["tool_calls"][0]["function"]["name"] == "get_prompt"
        assert captured["messages"][3] == {
            "role": "tool",
            "tool_call_id": "c0",
            "content": "the prompt",
        }
        assert captured["tools"][0]["function"]["name"] == "run_tests"

        assert response.assistant_text == ""
        assert response.tool_calls[0] == ToolCall(
            "call_9", "run_tests", {"func": "def f(): pass"}
        )
        assert response.token_usage == TokenUsage(12, 5)

    def test_retryable_status(self):
        backend = self.make_backend(lambda req: httpx.Response(429, json={}))
        with pytest.raises(RetryableBackendError):
            backend.complete(request())

    def test_non_retryable_client_error(self):
        backend = self.make_backend(
            lambda req: httpx.Response(400, json={"error": "bad"})
        )
        with pytest.raises(BackendError):
            backend.complete(request())

    def test_malformed_arguments_preserved_raw(self):
        def handler(req: httpx.Request) -> httpx.Response:
            return httpx.Response(
                200,
                json={
                    "choices": [
                        {
                            "message": {
                                "content": "",
                                "tool_calls": [
                                    {
                                        "id": "c",
                                        "type": "function",
                                        "function": {"name": "t", "arguments": "{broken"},
                                    }
                                ],
                            }
                        }
                    ]
                },
            )

        response = self.make_backend(handler).complete(request())
        assert response.tool_calls[0].arguments == {"_raw": "{broken"}


class TestResponseSerialization:
    def test_round_trip(self):
        response = ChatResponse(
            assistant_text="text",
            tool_calls=(ToolCall("c", "t", {"a": [1, {"b": None}]}),),
            token_usage=TokenUsage(7, 2),
        )
        assert response_from_dict(response_to_dict(response)) == response
