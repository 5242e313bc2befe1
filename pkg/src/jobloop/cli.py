"""Operator entry points: run a job, replay a recorded run, score results.

Exit codes: 0 success, 1 partial failure or divergence, 2 unusable input or
configuration.
"""

from __future__ import annotations

import json
import re
import signal
import sys
import tempfile
import threading
from pathlib import Path

import click

from jobloop.backends import (
    Backend,
    CachedBackend,
    CacheStore,
    EchoBackend,
    LiveBackend,
    RecordingBackend,
    ReplayScript,
    ScriptedBackend,
)
from jobloop.chat import response_to_dict, transcript_to_text
from jobloop.docgen import build_evaluation_prompt, load_docgen_config
from jobloop.engine import EngineConfig, run_job
from jobloop.humaneval import (
    FakeExecutor,
    SubprocessExecutor,
    HumanEvalTools,
    load_corpus,
    load_results,
    score_pass_at_1,
)
from jobloop.jobs import JobDescription, JobValidationError, load_job_file
from jobloop.monitor import JsonlEventWriter, Monitor, finalize_run
from jobloop.tools import ToolRegistry


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _raise_interrupt(signum, frame) -> None:
    raise KeyboardInterrupt()


def _safe_name(name: str) -> str:
    return re.sub(r"[^\w.-]+", "_", name)


def _load_job(job_file: str) -> JobDescription:
    path = Path(job_file)
    if not path.exists():
        _fail(f"job file not found: {job_file}", 2)
    try:
        return load_job_file(path)
    except (json.JSONDecodeError, JobValidationError, KeyError) as exc:
        _fail(f"could not parse job file: {exc}", 2)
    raise AssertionError("unreachable")


def _build_executor(fake_executor: bool, exec_table: str | None, executor_cmd: str | None):
    if executor_cmd:
        return SubprocessExecutor(executor_cmd.split())
    if fake_executor:
        if exec_table:
            return FakeExecutor.from_file(exec_table)
        return FakeExecutor()
    return None


def _build_tools(
    jd: JobDescription,
    backend: Backend,
    config: EngineConfig,
    out: Path,
    corpus_path: str | None,
    docgen_config: str | None,
    fake_executor: bool,
    exec_table: str | None,
    executor_cmd: str | None,
):
    """Build the registry for the job's tool set; returns (registry, handle)
    where the handle is the HumanEvalTools or the DocgenSetup."""
    registry = ToolRegistry()
    if jd.tool_set_name == "humaneval":
        if not corpus_path:
            _fail("humaneval jobs need --corpus", 2)
        executor = _build_executor(fake_executor, exec_table, executor_cmd)
        if executor is None:
            _fail("humaneval jobs need --fake-executor or --executor-cmd", 2)
        tools = HumanEvalTools(
            corpus=load_corpus(corpus_path),
            executor=executor,
            results_path=out / "results.json",
        )
        tools.register_into(registry)
        return registry, tools
    if jd.tool_set_name == "wikigen":
        if not docgen_config:
            _fail("wikigen jobs need --docgen-config", 2)
        setup = load_docgen_config(
            docgen_config,
            backend=backend,
            model_id=config.model_id,
            temperature=config.temperature,
            out_dir=out,
        )
        setup.tools.register_into(registry)
        return registry, setup
    _fail(f"unknown tool set {jd.tool_set_name!r}", 2)
    raise AssertionError("unreachable")


def _write_transcripts(states, out: Path) -> None:
    transcripts_dir = out / "transcripts"
    transcripts_dir.mkdir(parents=True, exist_ok=True)
    for sid, state in states.items():
        path = transcripts_dir / f"{_safe_name(sid)}.json"
        path.write_text(transcript_to_text(state.transcript.turns), encoding="utf-8")


@click.group()
def main() -> None:
    """Compile declarative jobs into prompts and run model/tool loops."""


@main.command("run")
@click.option("--job", "job_file", required=True, help="Declarative job file (JSON).")
@click.option(
    "--backend",
    "backend_kind",
    type=click.Choice(["live", "scripted", "echo"]),
    default="scripted",
    show_default=True,
)
@click.option("--model", default="scripted", show_default=True, help="Model id for requests.")
@click.option("--parallel/--sequential", "parallel", default=False)
@click.option("--cache-dir", default=None, help="Directory for the response cache.")
@click.option("--replay", "replay_file", default=None, help="Recorded responses to replay.")
@click.option("--record", "record_file", default=None, help="Write a replayable recording here.")
@click.option("--out", "out_dir", default="out", show_default=True)
@click.option("--fake-executor", is_flag=True, help="Use the table-driven fake executor.")
@click.option("--exec-table", default=None, help="Outcome table for the fake executor.")
@click.option("--executor-cmd", default=None, help="Command for the sandbox process.")
@click.option("--corpus", "corpus_path", default=None, help="Problem corpus (JSONL).")
@click.option("--docgen-config", default=None, help="Document-generation config (JSON).")
@click.option("--max-iterations", default=40, show_default=True)
@click.option("--token-budget", default=None, type=int)
@click.option("--review/--no-review", "review", default=False)
def cmd_run(
    job_file: str,
    backend_kind: str,
    model: str,
    parallel: bool,
    cache_dir: str | None,
    replay_file: str | None,
    record_file: str | None,
    out_dir: str,
    fake_executor: bool,
    exec_table: str | None,
    executor_cmd: str | None,
    corpus_path: str | None,
    docgen_config: str | None,
    max_iterations: int,
    token_budget: int | None,
    review: bool,
) -> None:
    """Run every section of a job and write transcripts, assets, and a summary."""
    jd = _load_job(job_file)
    try:
        config = EngineConfig(
            parallel=parallel,
            max_iterations=max_iterations,
            token_budget=token_budget,
            review_enabled=review,
            model_id=model,
        )
    except ValueError as exc:
        _fail(f"invalid configuration: {exc}", 2)
        return

    backend: Backend
    if backend_kind == "echo":
        backend = EchoBackend()
    elif backend_kind == "scripted":
        if not replay_file:
            _fail("scripted backend needs --replay", 2)
        if not Path(replay_file).exists():
            _fail(f"replay file not found: {replay_file}", 2)
        backend = ScriptedBackend(ReplayScript.load(replay_file))
    else:
        backend = LiveBackend()

    if cache_dir:
        store = CacheStore(Path(cache_dir) / "cache.jsonl")
        backend = CachedBackend(backend, store)
    if record_file:
        backend = RecordingBackend(backend, record_file)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    registry, handle = _build_tools(
        jd,
        backend,
        config,
        out,
        corpus_path,
        docgen_config,
        fake_executor,
        exec_table,
        executor_cmd,
    )

    monitor = Monitor(token_budget=token_budget)
    events = JsonlEventWriter(out / "events.jsonl")

    settled: dict[str, object] = {}
    previous_sigterm = None
    if threading.current_thread() is threading.main_thread():
        previous_sigterm = signal.signal(signal.SIGTERM, _raise_interrupt)
    try:
        states = run_job(
            jd,
            registry,
            backend,
            config,
            monitor,
            events,
            on_section_settled=lambda state: settled.__setitem__(
                state.section_id, state
            ),
        )
    except KeyboardInterrupt:
        # Finalize whatever settled before the interrupt so no started run
        # silently loses its summary.
        _write_transcripts(settled, out)
        finalize_run(settled, monitor.ledger, out)
        click.echo(
            f"interrupted: summary covers {len(settled)} settled section(s)", err=True
        )
        sys.exit(1)
    finally:
        if previous_sigterm is not None:
            signal.signal(signal.SIGTERM, previous_sigterm)

    _write_transcripts(states, out)
    if jd.tool_set_name == "wikigen":
        tools = handle.tools
        document = tools.assemble_document()
        if document:
            target = _safe_name(tools.target_name)
            (out / f"draft_{target}.md").write_text(document, encoding="utf-8")
            if handle.target_reference:
                prompts_dir = out / "judge_prompts"
                prompts_dir.mkdir(parents=True, exist_ok=True)
                (prompts_dir / f"{target}.md").write_text(
                    build_evaluation_prompt(document, handle.target_reference),
                    encoding="utf-8",
                )
    finalize_run(states, monitor.ledger, out)

    for sid, state in states.items():
        click.echo(f"{sid}: {state.status} ({state.iterations} iterations)")
    completed = sum(1 for s in states.values() if s.status == "completed")
    click.echo(f"{completed}/{len(states)} sections completed")
    sys.exit(0 if completed == len(states) else 1)


@main.command("replay")
@click.option("--replay", "replay_file", required=True, help="Recording to replay.")
@click.option("--job", "job_file", required=True)
@click.option("--model", default="scripted", show_default=True)
@click.option("--out", "out_dir", default=None, help="Optional output directory.")
@click.option("--fake-executor", is_flag=True, default=True)
@click.option("--exec-table", default=None)
@click.option("--executor-cmd", default=None)
@click.option("--corpus", "corpus_path", default=None)
@click.option("--docgen-config", default=None)
@click.option("--max-iterations", default=40, show_default=True)
def cmd_replay(
    replay_file: str,
    job_file: str,
    model: str,
    out_dir: str | None,
    fake_executor: bool,
    exec_table: str | None,
    executor_cmd: str | None,
    corpus_path: str | None,
    docgen_config: str | None,
    max_iterations: int,
) -> None:
    """Re-run a recording deterministically and verify it matches, step by step.

    Exits 0 only if the rerun consumed the recording exactly: same requests,
    same responses, same order.
    """
    jd = _load_job(job_file)
    if not Path(replay_file).exists():
        _fail(f"replay file not found: {replay_file}", 2)
    try:
        script = ReplayScript.load(replay_file)
    except Exception as exc:
        _fail(f"could not parse replay file: {exc}", 2)
        return

    config = EngineConfig(parallel=False, max_iterations=max_iterations, model_id=model)
    backend = ScriptedBackend(script)
    out = Path(out_dir) if out_dir else Path(tempfile.mkdtemp(prefix="jobloop-replay-"))
    out.mkdir(parents=True, exist_ok=True)
    registry, _tools = _build_tools(
        jd,
        backend,
        config,
        out,
        corpus_path,
        docgen_config,
        fake_executor,
        exec_table,
        executor_cmd,
    )

    monitor = Monitor()
    states = run_job(jd, registry, backend, config, monitor, None)

    for sid, state in states.items():
        click.echo(f"section {sid}:")
        for turn in state.transcript.turns[1:]:
            if turn.role == "assistant":
                first_line = turn.content.splitlines()[0] if turn.content else ""
                click.echo(f"  assistant: {first_line}")
                for call in turn.tool_calls:
                    click.echo(f"  tool call: {call.name}({json.dumps(call.arguments)[:80]})")
            elif turn.role == "tool":
                first_line = turn.content.splitlines()[0] if turn.content else ""
                click.echo(f"  tool result: {first_line[:100]}")
        click.echo(f"  -> {state.status}")

    recorded = [
        (fp, response_to_dict(response)) for fp, response in script.records
    ]
    consumed = [
        (fp, response_to_dict(response)) for fp, response in backend.consumed
    ]
    if consumed != recorded:
        length = min(len(consumed), len(recorded))
        divergent = "<missing>"
        for i in range(length):
            if consumed[i] != recorded[i]:
                divergent = recorded[i][0]
                break
        else:
            if len(recorded) > length:
                divergent = recorded[length][0]
            elif len(consumed) > length:
                divergent = consumed[length][0]
        click.echo(f"replay diverged at fingerprint {divergent}", err=True)
        sys.exit(1)
    failed = [sid for sid, s in states.items() if s.status == "failed"]
    if failed:
        click.echo(f"sections failed: {', '.join(failed)}", err=True)
        sys.exit(1)
    click.echo(f"replay ok: {len(consumed)} exchanges matched")
    sys.exit(0)


@main.command("score")
@click.option("--results", "results_file", required=True, help="Saved solutions (JSON).")
@click.option("--corpus", "corpus_path", required=True, help="Problem corpus (JSONL).")
@click.option("--fake-executor", is_flag=True)
@click.option("--exec-table", default=None)
@click.option("--executor-cmd", default=None)
@click.option("--out", "out_dir", default=None, help="Where to write score.json.")
def cmd_score(
    results_file: str,
    corpus_path: str,
    fake_executor: bool,
    exec_table: str | None,
    executor_cmd: str | None,
    out_dir: str | None,
) -> None:
    """Score saved solutions against the corpus's official tests (pass@1)."""
    try:
        solutions = load_results(results_file)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        _fail(f"could not read results: {exc}", 2)
        return
    if not Path(corpus_path).exists():
        _fail(f"corpus not found: {corpus_path}", 2)
    corpus = load_corpus(corpus_path)
    executor = _build_executor(fake_executor, exec_table, executor_cmd)
    if executor is None:
        _fail("scoring needs --fake-executor or --executor-cmd", 2)
        return

    report = score_pass_at_1(solutions, corpus, executor)
    click.echo(f"{report.passed}/{report.total} ({report.pass_at_1}%)")
    target = Path(out_dir) if out_dir else Path(results_file).parent
    target.mkdir(parents=True, exist_ok=True)
    (target / "score.json").write_text(
        json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    sys.exit(0)


if __name__ == "__main__":
    main()
