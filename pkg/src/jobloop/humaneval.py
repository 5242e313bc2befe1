"""Code-generation workflow over HumanEval-shaped corpora.

Supplies the job description (fetch prompt, develop tests, iterate, save),
the tool set backing it, executors speaking the sandbox protocol, and pass@1
scoring against the official tests.
"""

from __future__ import annotations

import hashlib
import json
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from jobloop.jobs import JobDescription, JobValidationError, Task, validate_job_description
from jobloop.tools import (
    ToolDescriptor,
    ToolFailure,
    ToolOutput,
    ToolParam,
    ToolRegistry,
)

TASK_ID_PREFIX = "HumanEval/"

DEVELOP_TESTS_DESCRIPTION = """Think through the problem and develop an initial set of test cases that will be used to check the logic for your function. The test cases must be implemented as a function called 'def check(candidate)' that takes the function as an argument. Each test is an 'assert' statement that calls the function with some inputs and verifies that that output is as expected. For example, if the task is to create a function called 'add_two_numbers", the test function might look like:
    def check(candidate):
        assert add_two_numbers(1, 2) == 3
        assert add_two_numbers(0, 0) == 0
        assert add_two_numbers(-1, 1) == 0
        assert add_two_numbers(1.5, 1) == 2.5

    When writing test cases, think through edge cases and different types of inputs that might be passed to the function. Some functions that may seem very simple have a trick to them. When mapping from a real world description of a problem to the algorithm, make sure you have the situation modeled correctly. Be sure the function behaves correctly when numbers are integers or floats. Be sure to handle negative numbers appropriately. If you have a test case that is failing, write out the intermediate steps involved in that test case and see if that explains why your implementation is failing. If you need to debug, you can add print statements into the functions you pass to run_tests. Think about issues like empty inputs and multiple delimiters.

    Remember that check must take the 'candidate' argument that is the function to test."""

WRITE_AND_TEST_DESCRIPTION = """In this task you iteratively refine your implementation and test cases. Decide how to implement the function and call run_tests to check your implementation, passing in the code and tests. Make sure to include all required imports. If the tests don't pass, check both your implementation and the test cases and decide which needs to be adjusted (or both). Don't assume the test cases are correct, review the problem specification and adjust if necessary. Also, feel free to add more tests. Keep going as long as you are making progress, but if you can't get all the tests to pass after a few tries, just save your output and complete."""

FINAL_OUTPUT_DESCRIPTION = """Call save_final_output to save off your final answer. This should include your function implementation as well as your test function. Always do this, even if you aren't completely happy with your answer. Signal that you have completed the example by calling the complete_section function."""

CODEGEN_TASKS = (
    Task(
        task_name="Get the prompt",
        details={
            "description": "Find the coding prompt for the current section by calling get_prompt",
        },
    ),
    Task(
        task_name="Develop initial test cases",
        details={"description": DEVELOP_TESTS_DESCRIPTION},
    ),
    Task(
        task_name="Write and test code",
        details={"description": WRITE_AND_TEST_DESCRIPTION},
    ),
    Task(
        task_name="Produce the final output.",
        details={"description": FINAL_OUTPUT_DESCRIPTION},
    ),
)

CODEGEN_ROLE = (
    "You are an expert Python programmer who writes correct, thoroughly tested "
    "code."
)
CODEGEN_CONTEXT = (
    "You are completing coding challenges. Each section of this job is one "
    "challenge, identified by its task id. Use the provided functions to fetch "
    "the prompt, run your tests, and save your final answer."
)


@dataclass(frozen=True)
class Problem:
    """One corpus entry: prompt (signature plus docstring) and official tests."""

    task_id: str
    prompt: str
    official_tests: str
    entry_point: str


@dataclass(frozen=True)
class Solution:
    task_id: str
    func_body: str  # body only, each line indented 4 spaces
    test_func: str  # full `def check(candidate)` definition


def load_corpus(path: str | Path) -> dict[str, Problem]:
    """Load a HumanEval-shaped JSONL corpus (task_id/prompt/test/entry_point)."""
    problems: dict[str, Problem] = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            problem = Problem(
                task_id=data["task_id"],
                prompt=data["prompt"],
                official_tests=data["test"],
                entry_point=data["entry_point"],
            )
            problems[problem.task_id] = problem
    return problems


def build_codegen_job(
    problem_ids: list[str], corpus: dict[str, Problem]
) -> JobDescription:
    """Job with one section per problem id and the four-task library."""
    unknown = [pid for pid in problem_ids if pid not in corpus]
    if unknown:
        raise ValueError(f"unknown task ids: {', '.join(unknown)}")
    jd = JobDescription(
        role=CODEGEN_ROLE,
        context=CODEGEN_CONTEXT,
        task_library=CODEGEN_TASKS,
        sections=tuple(problem_ids),
        tool_set_name="humaneval",
    )
    errors = validate_job_description(jd)
    if errors:
        raise JobValidationError(errors)
    return jd


# --- executors --------------------------------------------------------------


@dataclass(frozen=True)
class ExecRequest:
    program_source: str
    timeout_s: float = 10.0
    output_cap_bytes: int = 65536

    def __post_init__(self) -> None:
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")


@dataclass(frozen=True)
class ExecOutcome:
    verdict: str  # passed | assertion_failed | runtime_error | timeout
    detail: str = ""


class ExecutorUnavailable(Exception):
    """The executor cannot run programs at all (as opposed to a failing program)."""


class CodeExecutor(Protocol):
    def execute(self, request: ExecRequest) -> ExecOutcome: ...


def program_hash(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8")).hexdigest()


class FakeExecutor:
    """Table-driven executor mapping program hashes to frozen outcomes.

    Lets the whole suite run without any real sandbox process.
    """

    def __init__(self, table: dict[str, ExecOutcome] | None = None) -> None:
        self.table = dict(table or {})

    @classmethod
    def from_file(cls, path: str | Path) -> "FakeExecutor":
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
        return cls(
            {
                key: ExecOutcome(value["verdict"], value.get("detail", ""))
                for key, value in raw.items()
            }
        )

    def execute(self, request: ExecRequest) -> ExecOutcome:
        key = program_hash(request.program_source)
        outcome = self.table.get(key)
        if outcome is None:
            return ExecOutcome(
                "runtime_error", f"no scripted outcome for program {key[:12]}"
            )
        return outcome


class SubprocessExecutor:
    """Client for the sandbox protocol: one JSON line out, one JSON line back."""

    def __init__(self, command: list[str], startup_timeout_s: float = 30.0) -> None:
        self.command = list(command)
        self.startup_timeout_s = startup_timeout_s

    def execute(self, request: ExecRequest) -> ExecOutcome:
        payload = json.dumps(
            {
                "program": request.program_source,
                "timeout_s": request.timeout_s,
                "output_cap": request.output_cap_bytes,
            }
        )
        try:
            completed = subprocess.run(
                self.command,
                input=payload + "\n",
                capture_output=True,
                text=True,
                timeout=request.timeout_s + self.startup_timeout_s,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise ExecutorUnavailable(f"sandbox process failure: {exc}")
        if completed.returncode != 0:
            raise ExecutorUnavailable(
                f"sandbox exited with code {completed.returncode}: "
                f"{completed.stderr[:500]}"
            )
        line = completed.stdout.strip().splitlines()
        if not line:
            raise ExecutorUnavailable("sandbox produced no response")
        try:
            data = json.loads(line[0])
        except json.JSONDecodeError as exc:
            raise ExecutorUnavailable(f"bad sandbox response: {exc}")
        if "error" in data:
            raise ExecutorUnavailable(f"sandbox protocol error: {data['error']}")
        return ExecOutcome(data.get("verdict", ""), data.get("detail", ""))


# --- tools ------------------------------------------------------------------


def check_invocation(entry_point: str) -> str:
    return f"check({entry_point})\n"


def assemble_scoring_program(problem: Problem, solution: Solution) -> str:
    """prompt ++ func_body ++ newline ++ official tests ++ newline ++ check call."""
    return (
        problem.prompt
        + solution.func_body
        + "\n"
        + problem.official_tests
        + "\n"
        + check_invocation(problem.entry_point)
    )


def assemble_test_program(func: str, test_func: str, entry_point: str) -> str:
    """Program run_tests submits: the model's code, its tests, the check call."""
    return func + "\n" + test_func + "\n" + check_invocation(entry_point)


class HumanEvalTools:
    """Tool set for the code-generation workflow.

    Pure lookups plus a write-serialized results store; safe to share across
    concurrent sections.
    """

    def __init__(
        self,
        corpus: dict[str, Problem],
        executor: CodeExecutor,
        results_path: str | Path | None = None,
        timeout_s: float = 10.0,
        output_cap_bytes: int = 65536,
    ) -> None:
        self.corpus = corpus
        self.executor = executor
        self.results_path = Path(results_path) if results_path else None
        self.timeout_s = timeout_s
        self.output_cap_bytes = output_cap_bytes
        self.solutions: dict[str, Solution] = {}
        self._lock = threading.Lock()

    def get_prompt(self, task_id: str) -> str:
        if not task_id.startswith(TASK_ID_PREFIX):
            raise ToolFailure(
                f'task_id must include the "{TASK_ID_PREFIX}" prefix, got {task_id!r}'
            )
        problem = self.corpus.get(task_id)
        if problem is None:
            raise ToolFailure(f"unknown task id {task_id!r}")
        return problem.prompt

    def run_tests(self, func: str, test_func: str, _section: str = "") -> str:
        problem = self.corpus.get(_section)
        if problem is None:
            raise ToolFailure(f"no problem loaded for section {_section!r}")
        program = assemble_test_program(func, test_func, problem.entry_point)
        try:
            outcome = self.executor.execute(
                ExecRequest(program, self.timeout_s, self.output_cap_bytes)
            )
        except ExecutorUnavailable as exc:
            raise ToolFailure(f"executor unavailable: {exc}")
        if outcome.verdict == "passed":
            return "All tests PASSED"
        if outcome.verdict == "assertion_failed":
            return f"FAILED: {outcome.detail}"
        if outcome.verdict == "timeout":
            return f"TIMEOUT: execution exceeded {self.timeout_s} s"
        if "SyntaxError" in outcome.detail:
            raise ToolFailure(outcome.detail)
        return outcome.detail or "execution failed"

    def save_final_output(self, task_id: str, func: str, test_func: str) -> ToolOutput:
        if task_id not in self.corpus:
            raise ToolFailure(f"unknown task id {task_id!r}")
        warnings: list[str] = []
        stripped = [line for line in func.splitlines() if line.strip()]
        if not stripped:
            warnings.append("empty function body saved")
        elif not stripped[0].startswith("    "):
            warnings.append("function body does not start with 4-space indentation")
        if "def check(candidate)" not in test_func:
            warnings.append("test_func does not define 'def check(candidate)'")

        with self._lock:
            self.solutions[task_id] = Solution(task_id, func, test_func)
            if self.results_path:
                save_results(self.solutions, self.results_path)

        content = f"Saved final output for {task_id}."
        for warning in warnings:
            content += f"\n[warning] {warning}"
        return ToolOutput(content, assets={"func": func, "test_func": test_func})

    def register_into(self, registry: ToolRegistry) -> None:
        registry.register(
            ToolDescriptor(
                name="get_prompt",
                description="Returns the prompt for the given task.",
                params=(
                    ToolParam(
                        "task_id",
                        "string",
                        'The task id, including the "HumanEval/" prefix. '
                        'For example, "HumanEval/10".',
                    ),
                ),
            ),
            self.get_prompt,
        )
        registry.register(
            ToolDescriptor(
                name="run_tests",
                description=(
                    "Runs the tests in test_func against the function in func "
                    "inside a sandbox and reports failures."
                ),
                params=(
                    ToolParam(
                        "func",
                        "string",
                        "The function implementation to test, including the "
                        "signature and any required imports.",
                    ),
                    ToolParam(
                        "test_func",
                        "string",
                        "The full definition of the check function (including "
                        "the def check line).",
                    ),
                ),
            ),
            self.run_tests,
        )
        registry.register(
            ToolDescriptor(
                name="save_final_output",
                description="Writes the final output for the problem.",
                params=(
                    ToolParam("task_id", "string", "The problem identifier."),
                    ToolParam(
                        "func",
                        "string",
                        "The body of the function indented by 4 spaces "
                        "(without the function signature).",
                    ),
                    ToolParam(
                        "test_func",
                        "string",
                        "The full definition of the check function (including "
                        "the def check line).",
                    ),
                ),
            ),
            self.save_final_output,
        )


# --- results and scoring ----------------------------------------------------


def save_results(solutions: dict[str, Solution], path: str | Path) -> None:
    data = {
        task_id: {"func": s.func_body, "test_func": s.test_func}
        for task_id, s in sorted(solutions.items())
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(
        json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_results(path: str | Path) -> dict[str, Solution]:
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    return {
        task_id: Solution(task_id, value["func"], value["test_func"])
        for task_id, value in raw.items()
    }


@dataclass(frozen=True)
class ScoreReport:
    passed: int
    total: int
    pass_at_1: float  # percent, one decimal
    failures: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {"passed": self.passed, "total": self.total, "pass_at_1": self.pass_at_1}


def pass_rate_percent(passed: int, total: int) -> float:
    if total == 0:
        return 0.0
    return round(100.0 * passed / total, 1)


def score_pass_at_1(
    solutions: dict[str, Solution],
    corpus: dict[str, Problem],
    executor: CodeExecutor,
    timeout_s: float = 10.0,
    output_cap_bytes: int = 65536,
    max_workers: int = 1,
) -> ScoreReport:
    """Run each solution against its official tests; missing solutions fail.

    Executor calls may run concurrently up to `max_workers`; the report is
    independent of the pool size.
    """

    def _verdict(problem: Problem) -> bool:
        solution = solutions.get(problem.task_id)
        if solution is None:
            return False
        program = assemble_scoring_program(problem, solution)
        outcome = executor.execute(ExecRequest(program, timeout_s, output_cap_bytes))
        return outcome.verdict == "passed"

    problems = list(corpus.values())
    if max_workers > 1 and len(problems) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            verdicts = list(pool.map(_verdict, problems))
    else:
        verdicts = [_verdict(p) for p in problems]

    failures = tuple(
        p.task_id for p, ok in zip(problems, verdicts) if not ok
    )
    passed = sum(verdicts)
    total = len(problems)
    return ScoreReport(passed, total, pass_rate_percent(passed, total), failures)
