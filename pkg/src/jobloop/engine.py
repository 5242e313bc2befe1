"""Per-section iterative model/tool loop with loop detection and recovery.

Each section runs independently: the model receives the compiled system
message plus the cumulative context, its tool calls are dispatched, and the
results are appended back until the section completes, a loop is detected,
the iteration cap is hit, or the backend fails for good.
"""

from __future__ import annotations

import json
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from jobloop.backends import (
    Backend,
    BackendError,
    RetryableBackendError,
)
from jobloop.chat import ChatRequest, ChatResponse, Turn
from jobloop.jobs import (
    CompiledTemplate,
    JobDescription,
    JobValidationError,
    compile_master_template,
    validate_job_description,
)
from jobloop.monitor import (
    ACTION_REQUEST_POP,
    Monitor,
    MonitorEvent,
    estimate_tokens,
    make_event,
)
from jobloop.tools import CompletionFlag, ToolRegistry

TERMINATION_CAUSES = ("completed", "loop_detected", "iteration_cap", "failed")

EventSink = Callable[[MonitorEvent], None]


class BudgetInfeasibleError(RuntimeError):
    """The token budget cannot hold the system message plus the recent turns."""


@dataclass
class EngineConfig:
    """Run configuration shared by every section processor."""

    parallel: bool = False
    max_iterations: int = 40
    loop_window: int = 6
    loop_threshold: int = 3
    max_retries: int = 1
    token_budget: int | None = None
    review_enabled: bool = False
    model_id: str = "scripted"
    temperature: float = 0.0
    backend_max_attempts: int = 3
    backend_backoff_s: float = 0.1
    tool_result_char_cap: int = 20_000

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.loop_threshold < 2:
            raise ValueError("loop_threshold must be >= 2")
        if self.loop_window < self.loop_threshold:
            raise ValueError("loop_window must be >= loop_threshold")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.backend_max_attempts < 1:
            raise ValueError("backend_max_attempts must be >= 1")


def turn_token_estimate(turn: Turn, estimator: Callable[[str], int]) -> int:
    total = estimator(turn.content)
    for call in turn.tool_calls:
        total += estimator(call.name)
        total += estimator(json.dumps(call.arguments, sort_keys=True))
    return total


class Context:
    """Append-ordered transcript of one section; turn 0 is the system message."""

    def __init__(
        self,
        system_message: str,
        estimator: Callable[[str], int] = estimate_tokens,
    ) -> None:
        self._estimator = estimator
        self.turns: list[Turn] = [Turn("system", system_message)]
        self.token_estimate = turn_token_estimate(self.turns[0], estimator)

    @classmethod
    def from_turns(
        cls, turns: list[Turn], estimator: Callable[[str], int] = estimate_tokens
    ) -> "Context":
        if not turns or turns[0].role != "system":
            raise ValueError("a context starts with the system turn")
        context = cls.__new__(cls)
        context._estimator = estimator
        context.turns = list(turns)
        context.token_estimate = sum(
            turn_token_estimate(t, estimator) for t in turns
        )
        return context

    def append(self, turn: Turn) -> None:
        self.turns.append(turn)
        self.token_estimate += turn_token_estimate(turn, self._estimator)


@dataclass
class SectionState:
    """Everything recorded about one section run."""

    section_id: str
    status: str = "running"
    iterations: int = 0
    retries_used: int = 0
    review_verdict: str = "skipped"  # pass | fail | skipped
    transcript: Context = field(default_factory=lambda: Context(""))
    assets: dict[str, str] = field(default_factory=dict)
    error: str = ""


def assistant_signature(turn: Turn) -> tuple:
    """What counts as "the same move": text plus canonicalized tool calls."""
    return (
        turn.content,
        tuple(
            (call.name, json.dumps(call.arguments, sort_keys=True, ensure_ascii=True))
            for call in turn.tool_calls
        ),
    )


def detect_loop(context: Context, window: int, threshold: int) -> bool:
    """True iff the last `window` assistant turns contain `threshold` identical ones."""
    recent = [t for t in context.turns if t.role == "assistant"][-window:]
    counts = Counter(assistant_signature(t) for t in recent)
    return bool(counts) and max(counts.values()) >= threshold


def pop_context(context: Context, token_budget: int) -> Context:
    """Shrink a context under the budget by dropping the oldest droppable turns.

    Turn 0 and the most recent four turns are always kept. An assistant turn
    and the tool turns answering it form one unit, so no call/result pair is
    ever split.
    """
    if context.token_estimate <= token_budget:
        return context

    turns = context.turns
    protected_from = max(1, len(turns) - 4)

    units: list[list[int]] = []
    i = 1
    while i < len(turns):
        if turns[i].role == "assistant":
            j = i + 1
            while j < len(turns) and turns[j].role == "tool":
                j += 1
            units.append(list(range(i, j)))
            i = j
        else:
            units.append([i])
            i += 1

    estimator = context._estimator
    estimate = context.token_estimate
    dropped: set[int] = set()
    for unit in units:
        if estimate <= token_budget:
            break
        if any(index >= protected_from for index in unit):
            continue
        for index in unit:
            dropped.add(index)
            estimate -= turn_token_estimate(turns[index], estimator)

    if estimate > token_budget:
        raise BudgetInfeasibleError(
            "budget infeasible: the system message and most recent turns exceed "
            f"the token budget of {token_budget}"
        )
    kept = [t for index, t in enumerate(turns) if index not in dropped]
    return Context.from_turns(kept, estimator)


def parse_review_verdict(text: str) -> tuple[str, str]:
    """Parse a reviewer reply into (verdict, feedback); fail-open on anything odd."""
    for line in text.splitlines():
        line = line.strip()
        if not line.startswith("VERDICT:"):
            continue
        if line == "VERDICT: PASS":
            return "pass", ""
        if line.startswith("VERDICT: FAIL:"):
            return "fail", line.split(":", 2)[2].strip()
        break
    return "unparseable", ""


def render_turns(turns: list[Turn]) -> str:
    lines: list[str] = []
    for turn in turns:
        if turn.role == "assistant" and turn.tool_calls:
            calls = ", ".join(
                f"{c.name}({json.dumps(c.arguments, ensure_ascii=False)})"
                for c in turn.tool_calls
            )
            lines.append(f"assistant: {turn.content}".rstrip())
            lines.append(f"assistant calls: {calls}")
        else:
            lines.append(f"{turn.role}: {turn.content}")
    return "\n".join(lines)


def _complete_with_retry(
    backend: Backend, request: ChatRequest, config: EngineConfig
) -> ChatResponse:
    attempt = 0
    while True:
        attempt += 1
        try:
            return backend.complete(request)
        except RetryableBackendError as exc:
            if attempt >= config.backend_max_attempts:
                raise BackendError(
                    f"backend failed after {attempt} attempts: {exc}"
                ) from exc
            time.sleep(config.backend_backoff_s * (2 ** (attempt - 1)))


def review_section(
    state: SectionState,
    backend: Backend,
    config: EngineConfig,
    emit: Callable[[MonitorEvent], None] | None = None,
) -> tuple[str, str]:
    """One extra backend exchange judging a completed section.

    Asks for a strict "VERDICT: PASS" / "VERDICT: FAIL: <reason>" line. An
    unparseable reply or backend failure counts as a pass with a warning;
    a review must never destroy completed work.
    """
    system_message = state.transcript.turns[0].content
    tail = render_turns(state.transcript.turns[1:][-10:])
    user = (
        f"The tasks for section {state.section_id} were just executed. Review the "
        "transcript tail below against the numbered task list from the system "
        "instructions. Reply with exactly one line: 'VERDICT: PASS' if the "
        "section satisfied its tasks, or 'VERDICT: FAIL: <reason>' if it did "
        f"not.\n\nTranscript tail:\n{tail}"
    )
    request = ChatRequest(
        model_id=config.model_id,
        turns=(Turn("system", system_message), Turn("user", user)),
        temperature=config.temperature,
    )
    try:
        response = _complete_with_retry(backend, request, config)
    except BackendError as exc:
        if emit:
            emit(
                make_event(
                    state.section_id,
                    "warning",
                    {"message": f"review backend failure, passing open: {exc}"},
                )
            )
        return "pass", ""
    if emit:
        emit(
            make_event(
                state.section_id,
                "append",
                {
                    "role": "review",
                    "backend_call": True,
                    "prompt_tokens": response.token_usage.prompt_tokens,
                    "completion_tokens": response.token_usage.completion_tokens,
                },
            )
        )
    verdict, feedback = parse_review_verdict(response.assistant_text)
    if verdict == "unparseable":
        if emit:
            emit(
                make_event(
                    state.section_id,
                    "warning",
                    {"message": "unparseable review verdict, treating as pass"},
                )
            )
        return "pass", ""
    return verdict, feedback


class _SectionRun:
    """Mutable helper binding one section's context, events, and pops."""

    def __init__(
        self,
        state: SectionState,
        config: EngineConfig,
        monitor: Monitor | None,
        event_sink: EventSink | None,
    ) -> None:
        self.state = state
        self.config = config
        self.monitor = monitor
        self.event_sink = event_sink

    def emit(self, kind: str, payload: dict) -> None:
        self.emit_event(make_event(self.state.section_id, kind, payload))

    def emit_event(self, event: MonitorEvent) -> None:
        if self.event_sink:
            self.event_sink(event)
        if self.monitor:
            for action in self.monitor.process_event(event):
                if action.kind == ACTION_REQUEST_POP and event.kind == "append":
                    self._pop()

    def _pop(self) -> None:
        budget = self.config.token_budget
        if budget is None:
            return
        context = self.state.transcript
        before = len(context.turns)
        new_context = pop_context(context, budget)
        if new_context is context:
            return
        self.state.transcript = new_context
        self.emit(
            "pop",
            {
                "dropped_turns": before - len(new_context.turns),
                "token_estimate": new_context.token_estimate,
            },
        )

    def append(self, turn: Turn, usage: dict | None = None) -> None:
        self.state.transcript.append(turn)
        payload = {
            "role": turn.role,
            "token_estimate": self.state.transcript.token_estimate,
        }
        if usage:
            payload.update(usage)
        self.emit("append", payload)


def _truncate_result(content: str, cap: int) -> str:
    if len(content) <= cap:
        return content
    return content[:cap] + "\n[truncated]"


def run_section(
    section_id: str,
    template: CompiledTemplate,
    tools: ToolRegistry,
    backend: Backend,
    config: EngineConfig,
    monitor: Monitor | None = None,
    event_sink: EventSink | None = None,
    feedback: str = "",
    retries_used: int = 0,
) -> SectionState:
    """Run one section to termination and return its state.

    Tool errors are fed back into the context rather than raised; only the
    four termination causes end the loop.
    """
    state = SectionState(
        section_id=section_id,
        transcript=Context(template.system_message),
        retries_used=retries_used,
    )
    run = _SectionRun(state, config, monitor, event_sink)

    user_message = template.initial_user_message_for(section_id)
    if feedback:
        user_message += f"\n\nReviewer feedback on the previous attempt:\n{feedback}"

    completion = CompletionFlag()
    cause = "failed"
    try:
        run.append(Turn("user", user_message))
        while True:
            state.iterations += 1
            request = ChatRequest(
                model_id=config.model_id,
                turns=tuple(state.transcript.turns),
                tool_descriptors=tuple(tools.describe_tools()),
                temperature=config.temperature,
            )
            try:
                response = _complete_with_retry(backend, request, config)
            except BackendError as exc:
                state.error = str(exc)
                cause = "failed"
                break

            run.append(
                Turn(
                    "assistant",
                    response.assistant_text,
                    tool_calls=response.tool_calls,
                ),
                usage={
                    "backend_call": True,
                    "prompt_tokens": response.token_usage.prompt_tokens,
                    "completion_tokens": response.token_usage.completion_tokens,
                },
            )

            for call in response.tool_calls:
                result = tools.dispatch_tool_call(call, section_id, completion)
                run.emit(
                    "dispatch",
                    {"tool": call.name, "call_id": call.call_id, "status": result.status},
                )
                run.append(
                    Turn(
                        "tool",
                        _truncate_result(result.content, config.tool_result_char_cap),
                        call_id=call.call_id,
                    )
                )
                state.assets.update(result.assets)

            if completion.is_set:
                cause = "completed"
                break
            if detect_loop(state.transcript, config.loop_window, config.loop_threshold):
                cause = "loop_detected"
                break
            if state.iterations >= config.max_iterations:
                cause = "iteration_cap"
                break
    except BudgetInfeasibleError as exc:
        state.error = str(exc)
        cause = "failed"

    state.status = cause

    if cause == "completed" and config.review_enabled:
        verdict, review_feedback = review_section(state, backend, config, run.emit_event)
        if verdict == "fail" and state.retries_used < config.max_retries:
            # A.-la "reprocess with updated instructions": rerun from scratch,
            # carrying the reviewer feedback into the initial user message.
            return run_section(
                section_id,
                template,
                tools,
                backend,
                config,
                monitor,
                event_sink,
                feedback=review_feedback,
                retries_used=state.retries_used + 1,
            )
        state.review_verdict = verdict

    run.emit(
        "terminate",
        {
            "cause": state.status,
            "iterations": state.iterations,
            "assets": sorted(state.assets),
        },
    )
    return state


def run_job(
    jd: JobDescription,
    tools: ToolRegistry,
    backend: Backend,
    config: EngineConfig,
    monitor: Monitor | None = None,
    event_sink: EventSink | None = None,
    on_section_settled: Callable[[SectionState], None] | None = None,
) -> dict[str, SectionState]:
    """Run every section of a job, concurrently or in listed order.

    A failing section never affects its peers; the result map always holds one
    state per section, in the job's section order. `on_section_settled` fires
    as each section finishes, letting callers checkpoint partial progress.
    """
    errors = validate_job_description(jd)
    if errors:
        raise JobValidationError(errors)
    template = compile_master_template(jd)

    def _run(section_id: str) -> SectionState:
        try:
            state = run_section(
                section_id, template, tools, backend, config, monitor, event_sink
            )
        except Exception as exc:  # containment: one section must not sink the rest
            state = SectionState(section_id=section_id, status="failed")
            state.error = f"{type(exc).__name__}: {exc}"
            if event_sink or monitor:
                run = _SectionRun(state, config, monitor, event_sink)
                run.emit(
                    "terminate",
                    {"cause": "failed", "iterations": state.iterations, "assets": []},
                )
        if on_section_settled:
            on_section_settled(state)
        return state

    if config.parallel and len(jd.sections) > 1:
        with ThreadPoolExecutor(max_workers=len(jd.sections)) as pool:
            futures = {sid: pool.submit(_run, sid) for sid in jd.sections}
            return {sid: future.result() for sid, future in futures.items()}
    return {sid: _run(sid) for sid in jd.sections}
