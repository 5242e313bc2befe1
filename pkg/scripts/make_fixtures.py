#!/usr/bin/env python3
"""Regenerate the shipped fixtures under fixtures/.

Authoring-time helper: the executor outcome tables are derived by actually
running each program in-process here, then frozen to JSON so the test suite
and the replay fixtures never need a real sandbox.
"""

from __future__ import annotations

import json
import linecache
import sys
import tempfile
import traceback
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from jobloop.backends import QueueBackend, RecordingBackend, write_records
from jobloop.chat import ChatResponse, transcript_to_text
from jobloop.docgen import build_docgen_job, parse_document
from jobloop.engine import EngineConfig, run_job
from jobloop.humaneval import (
    FakeExecutor,
    HumanEvalTools,
    Problem,
    assemble_scoring_program,
    assemble_test_program,
    build_codegen_job,
    program_hash,
)
from jobloop.jobs import save_job_file
from jobloop.tools import ToolCall, ToolRegistry

FIXTURES = REPO / "fixtures"


def run_program_inprocess(source: str) -> dict:
    """Authoring-time oracle: execute a program and classify the outcome."""
    with tempfile.NamedTemporaryFile(
        "w", suffix=".py", delete=False, encoding="utf-8"
    ) as handle:
        handle.write(source)
        path = handle.name
    linecache.clearcache()
    try:
        code = compile(source, path, "exec")
        exec(code, {"__name__": "__main__"})
    except AssertionError:
        detail = ""
        for frame in reversed(traceback.extract_tb(sys.exc_info()[2])):
            if frame.filename == path and frame.line and "assert" in frame.line:
                detail = frame.line.strip()
                break
        return {"verdict": "assertion_failed", "detail": detail or "assertion failed"}
    except SyntaxError as exc:
        return {"verdict": "runtime_error", "detail": f"SyntaxError: {exc}"}
    except BaseException as exc:  # noqa: BLE001 - classify anything the program raises
        return {"verdict": "runtime_error", "detail": f"{type(exc).__name__}: {exc}"}
    finally:
        Path(path).unlink(missing_ok=True)
    return {"verdict": "passed", "detail": ""}


# --- HumanEval/2 episode ------------------------------------------------------

HUMANEVAL_2 = {
    "task_id": "HumanEval/2",
    "prompt": '''def truncate_number(number: float) -> float:
    """ Given a positive floating point number, it can be decomposed into
    and integer part (largest integer smaller than given number) and decimals
    (leftover part always smaller than 1).

    Return the decimal part of the number.
    >>> truncate_number(3.5)
    0.5
    """
''',
    "test": '''METADATA = {
    'author': 'jt',
    'dataset': 'test'
}


def check(candidate):
    assert candidate(3.5) == 0.5
    assert abs(candidate(1.33) - 0.33) < 1e-6
    assert abs(candidate(123.456) - 0.456) < 1e-6
''',
    "entry_point": "truncate_number",
}

FUNC_V1 = (
    "def truncate_number(number: float) -> float:\n"
    "    return number - int(number)"
)
FUNC_V2 = (
    "def truncate_number(number: float) -> float:\n"
    "    return round(number - int(number), 10)"
)
BODY_V2 = "    return round(number - int(number), 10)"
CHECK_5 = (
    "def check(candidate):\n"
    "    # Test cases\n"
    "    assert candidate(3.5) == 0.5\n"
    "    assert candidate(4.0) == 0.0\n"
    "    assert candidate(0.123) == 0.123\n"
    "    assert candidate(123456.789) == 0.789\n"
    "    assert candidate(1.999999) == 0.999999"
)


def episode_responses() -> list[ChatResponse]:
    """The recorded coding episode: missing argument, failing assert, fix, save."""
    return [
        ChatResponse(
            assistant_text="Let's think through the problem and develop test cases.",
            tool_calls=(
                ToolCall("call_1", "get_prompt", {"task_id": "HumanEval/2"}),
            ),
        ),
        ChatResponse(
            assistant_text=(
                "The function should handle:\n"
                "- Numbers with non-zero decimal parts\n"
                "- Numbers with zero decimal parts\n"
                "- Very small decimal parts\n"
                "- Large numbers with decimal parts\n"
                "- Numbers very close to integers\n\n"
                "Let's create the check(candidate) function with these test "
                "cases:\n\n"
                f"{CHECK_5}\n\n"
                "Now that we have our test cases, let's implement the function "
                "and run the tests.\n\n"
                f"{FUNC_V1}"
            ),
            tool_calls=(ToolCall("call_2", "run_tests", {"func": FUNC_V1}),),
        ),
        ChatResponse(
            assistant_text=(
                "I missed providing the test_func argument. Let's correct that "
                "and run again."
            ),
            tool_calls=(
                ToolCall(
                    "call_3", "run_tests", {"func": FUNC_V1, "test_func": CHECK_5}
                ),
            ),
        ),
        ChatResponse(
            assistant_text=(
                "This might be due to floating-point precision issues. Let's "
                "update the function. We'll use the round function to ensure "
                "accuracy."
            ),
            tool_calls=(
                ToolCall(
                    "call_4", "run_tests", {"func": FUNC_V2, "test_func": CHECK_5}
                ),
            ),
        ),
        ChatResponse(
            assistant_text=(
                "The function has passed all test cases. Let's save the final "
                "implementation."
            ),
            tool_calls=(
                ToolCall(
                    "call_5",
                    "save_final_output",
                    {
                        "task_id": "HumanEval/2",
                        "func": BODY_V2,
                        "test_func": CHECK_5,
                    },
                ),
            ),
        ),
        ChatResponse(
            assistant_text=(
                "Now that we've saved the output, let's complete the section."
            ),
            tool_calls=(
                ToolCall(
                    "call_6",
                    "complete_section",
                    {"current_section_identifier": "HumanEval/2"},
                ),
            ),
        ),
    ]


def write_corpus(path: Path, problems: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for problem in problems:
            handle.write(json.dumps(problem, ensure_ascii=False) + "\n")


def make_humaneval2_fixtures() -> None:
    write_corpus(FIXTURES / "humaneval2_corpus.jsonl", [HUMANEVAL_2])
    corpus = {
        HUMANEVAL_2["task_id"]: Problem(
            HUMANEVAL_2["task_id"],
            HUMANEVAL_2["prompt"],
            HUMANEVAL_2["test"],
            HUMANEVAL_2["entry_point"],
        )
    }
    job = build_codegen_job(["HumanEval/2"], corpus)
    save_job_file(job, FIXTURES / "humaneval_job.json")

    from jobloop.humaneval import Solution

    entry = HUMANEVAL_2["entry_point"]
    scoring_program = assemble_scoring_program(
        corpus["HumanEval/2"], Solution("HumanEval/2", BODY_V2, CHECK_5)
    )
    table: dict[str, dict] = {}
    for program in (
        assemble_test_program(FUNC_V1, CHECK_5, entry),
        assemble_test_program(FUNC_V2, CHECK_5, entry),
        scoring_program,
    ):
        table[program_hash(program)] = run_program_inprocess(program)

    table_path = FIXTURES / "humaneval2_exec_table.json"
    table_path.write_text(json.dumps(table, indent=2, sort_keys=True) + "\n")

    registry = ToolRegistry()
    tools = HumanEvalTools(corpus, FakeExecutor.from_file(table_path))
    tools.register_into(registry)
    queue = QueueBackend(episode_responses())
    recorder = RecordingBackend(queue)
    states = run_job(
        job, registry, recorder, EngineConfig(parallel=False, model_id="scripted")
    )
    state = states["HumanEval/2"]
    assert state.status == "completed", state.status
    assert state.assets["func"] == BODY_V2

    write_records(recorder.records, FIXTURES / "humaneval2_replay.jsonl")
    (FIXTURES / "humaneval2_transcript.json").write_text(
        transcript_to_text(state.transcript.turns), encoding="utf-8"
    )


# --- toy corpus ---------------------------------------------------------------


def _toy(task_id: str, name: str, doc: str, sig: str, body: str, checks: list[str]) -> dict:
    prompt = f"def {name}{sig}:\n    \"\"\"{doc}\n    \"\"\"\n"
    check_lines = "\n".join(f"    assert {line}" for line in checks)
    test = f"def check(candidate):\n{check_lines}\n"
    return {
        "task_id": task_id,
        "prompt": prompt,
        "test": test,
        "entry_point": name,
        "_body": body,
    }


TOY_PROBLEMS = [
    _toy(
        "HumanEval/900",
        "add_two",
        "Return the sum of a and b.",
        "(a, b)",
        "    return a + b",
        ["candidate(1, 2) == 3", "candidate(0, 0) == 0", "candidate(-1, 1) == 0"],
    ),
    _toy(
        "HumanEval/901",
        "is_even",
        "Return True when n is even.",
        "(n)",
        "    return n % 2 == 0",
        ["candidate(2) is True", "candidate(3) is False", "candidate(0) is True"],
    ),
    _toy(
        "HumanEval/902",
        "double_list",
        "Return a list with every element doubled.",
        "(xs)",
        "    return [x * 2 for x in xs]",
        ["candidate([1, 2]) == [2, 4]", "candidate([]) == []"],
    ),
    _toy(
        "HumanEval/903",
        "count_vowels",
        "Return the number of vowels in s.",
        "(s)",
        "    return sum(1 for ch in s.lower() if ch in 'aeiou')",
        ["candidate('abc') == 1", "candidate('AEIOU') == 5", "candidate('xyz') == 0"],
    ),
    _toy(
        "HumanEval/904",
        "maximum_of_three",
        "Return the largest of a, b, and c.",
        "(a, b, c)",
        "    return max(a, b, c)",
        ["candidate(1, 2, 3) == 3", "candidate(3, 2, 1) == 3", "candidate(-1, -2, -3) == -1"],
    ),
    _toy(
        "HumanEval/905",
        "reverse_string",
        "Return s reversed.",
        "(s)",
        "    return s[::-1]",
        ["candidate('abc') == 'cba'", "candidate('') == ''"],
    ),
    _toy(
        "HumanEval/906",
        "sum_list",
        "Return the sum of the numbers in xs.",
        "(xs)",
        "    return sum(xs)",
        ["candidate([1, 2, 3]) == 6", "candidate([]) == 0"],
    ),
    _toy(
        "HumanEval/907",
        "absolute_value",
        "Return the absolute value of x.",
        "(x)",
        "    return x if x >= 0 else -x",
        ["candidate(-3) == 3", "candidate(4) == 4", "candidate(0) == 0"],
    ),
    _toy(
        "HumanEval/908",
        "clamp",
        "Clamp x into the inclusive range [lo, hi].",
        "(x, lo, hi)",
        "    return max(lo, min(hi, x))",
        ["candidate(5, 0, 3) == 3", "candidate(-1, 0, 3) == 0", "candidate(2, 0, 3) == 2"],
    ),
    _toy(
        "HumanEval/909",
        "repeat_word",
        "Return w repeated n times separated by single spaces.",
        "(w, n)",
        "    return ' '.join([w] * n)",
        ["candidate('hi', 2) == 'hi hi'", "candidate('x', 0) == ''"],
    ),
]


def toy_solver_responses(problems: list[dict]) -> list[ChatResponse]:
    responses: list[ChatResponse] = []
    for index, problem in enumerate(problems):
        task_id = problem["task_id"]
        name = problem["entry_point"]
        full_func = problem["prompt"].rstrip("\n") + "\n" + problem["_body"]
        prefix = f"call_{index}"
        responses.extend(
            [
                ChatResponse(
                    assistant_text=f"Let's fetch the prompt for {task_id}.",
                    tool_calls=(
                        ToolCall(f"{prefix}_1", "get_prompt", {"task_id": task_id}),
                    ),
                ),
                ChatResponse(
                    assistant_text=(
                        f"I'll implement {name} and check it against my tests."
                    ),
                    tool_calls=(
                        ToolCall(
                            f"{prefix}_2",
                            "run_tests",
                            {"func": full_func, "test_func": problem["test"]},
                        ),
                    ),
                ),
                ChatResponse(
                    assistant_text="All tests passed. Saving the final output.",
                    tool_calls=(
                        ToolCall(
                            f"{prefix}_3",
                            "save_final_output",
                            {
                                "task_id": task_id,
                                "func": problem["_body"],
                                "test_func": problem["test"],
                            },
                        ),
                    ),
                ),
                ChatResponse(
                    assistant_text="Section complete.",
                    tool_calls=(
                        ToolCall(
                            f"{prefix}_4",
                            "complete_section",
                            {"current_section_identifier": task_id},
                        ),
                    ),
                ),
            ]
        )
    return responses


def make_toy_fixtures() -> None:
    from jobloop.humaneval import Solution, load_corpus, save_results

    public = [
        {k: v for k, v in problem.items() if k != "_body"} for problem in TOY_PROBLEMS
    ]
    write_corpus(FIXTURES / "toy_corpus.jsonl", public)
    corpus = load_corpus(FIXTURES / "toy_corpus.jsonl")

    table: dict[str, dict] = {}
    solutions: dict[str, Solution] = {}
    for problem in TOY_PROBLEMS:
        task_id = problem["task_id"]
        full_func = problem["prompt"].rstrip("\n") + "\n" + problem["_body"]
        test_program = assemble_test_program(
            full_func, problem["test"], problem["entry_point"]
        )
        outcome = run_program_inprocess(test_program)
        assert outcome["verdict"] == "passed", (task_id, outcome)
        table[program_hash(test_program)] = outcome

        solution = Solution(task_id, problem["_body"], problem["test"])
        solutions[task_id] = solution
        scoring_program = assemble_scoring_program(corpus[task_id], solution)
        outcome = run_program_inprocess(scoring_program)
        assert outcome["verdict"] == "passed", (task_id, outcome)
        table[program_hash(scoring_program)] = outcome

    (FIXTURES / "toy_exec_table.json").write_text(
        json.dumps(table, indent=2, sort_keys=True) + "\n"
    )
    save_results(solutions, FIXTURES / "toy_results.json")

    job = build_codegen_job([p["task_id"] for p in TOY_PROBLEMS], corpus)
    save_job_file(job, FIXTURES / "toy_job.json")

    registry = ToolRegistry()
    tools = HumanEvalTools(
        corpus, FakeExecutor.from_file(FIXTURES / "toy_exec_table.json")
    )
    tools.register_into(registry)
    queue = QueueBackend(toy_solver_responses(TOY_PROBLEMS))
    recorder = RecordingBackend(queue)
    states = run_job(
        job, registry, recorder, EngineConfig(parallel=False, model_id="scripted")
    )
    for task_id, state in states.items():
        assert state.status == "completed", (task_id, state.status, state.error)
    write_records(recorder.records, FIXTURES / "toy_replay.jsonl")


# --- real corpus sample for the live-sandbox smoke test ------------------------

REAL_PROBLEMS = [
    HUMANEVAL_2,
    {
        "task_id": "HumanEval/3",
        "prompt": '''from typing import List


def below_zero(operations: List[int]) -> bool:
    """ You're given a list of deposit and withdrawal operations on a bank account that starts with
    zero balance. Your task is to detect if at any point the balance of account falls below zero, and
    at that point function should return True. Otherwise it should return False.
    >>> below_zero([1, 2, 3])
    False
    >>> below_zero([1, 2, -4, 5])
    True
    """
''',
        "test": '''def check(candidate):
    assert candidate([]) == False
    assert candidate([1, 2, -3, 1, 2, -3]) == False
    assert candidate([1, 2, -4, 5, 6]) == True
    assert candidate([1, -1, 2, -2, 5, -5, 4, -4]) == False
    assert candidate([1, -1, 2, -2, 5, -5, 4, -5]) == True
''',
        "entry_point": "below_zero",
        "_body": """    balance = 0
    for op in operations:
        balance += op
        if balance < 0:
            return True
    return False
""",
    },
    {
        "task_id": "HumanEval/7",
        "prompt": '''from typing import List


def filter_by_substring(strings: List[str], substring: str) -> List[str]:
    """ Filter an input list of strings only for ones that contain given substring
    >>> filter_by_substring([], 'a')
    []
    >>> filter_by_substring(['abc', 'bacd', 'cde', 'array'], 'a')
    ['abc', 'bacd', 'array']
    """
''',
        "test": '''def check(candidate):
    assert candidate([], 'john') == []
    assert candidate(['xxx', 'asd', 'xxy', 'john doe', 'xxxAAA', 'xxx'], 'xxx') == ['xxx', 'xxxAAA', 'xxx']
    assert candidate(['grunt', 'trumpet', 'prune', 'gruesome'], 'run') == ['grunt', 'prune']
''',
        "entry_point": "filter_by_substring",
        "_body": "    return [s for s in strings if substring in s]\n",
    },
    {
        "task_id": "HumanEval/8",
        "prompt": '''from typing import List, Tuple


def sum_product(numbers: List[int]) -> Tuple[int, int]:
    """ For a given list of integers, return a tuple consisting of a sum and a product of all the integers in a list.
    Empty sum should be equal to 0 and empty product should be equal to 1.
    >>> sum_product([])
    (0, 1)
    >>> sum_product([1, 2, 3, 4])
    (10, 24)
    """
''',
        "test": '''def check(candidate):
    assert candidate([]) == (0, 1)
    assert candidate([1, 1, 1]) == (3, 1)
    assert candidate([100, 0]) == (100, 0)
    assert candidate([3, 5, 7]) == (3 + 5 + 7, 3 * 5 * 7)
''',
        "entry_point": "sum_product",
        "_body": """    total = 0
    product = 1
    for n in numbers:
        total += n
        product *= n
    return (total, product)
""",
    },
    {
        "task_id": "HumanEval/23",
        "prompt": '''def strlen(string: str) -> int:
    """ Return length of given string
    >>> strlen('')
    0
    >>> strlen('abc')
    3
    """
''',
        "test": '''def check(candidate):
    assert candidate('') == 0
    assert candidate('x') == 1
    assert candidate('asdasnakj') == 9
''',
        "entry_point": "strlen",
        "_body": "    return len(string)\n",
    },
    {
        "task_id": "HumanEval/28",
        "prompt": '''from typing import List


def concatenate(strings: List[str]) -> str:
    """ Concatenate list of strings into a single string
    >>> concatenate([])
    ''
    >>> concatenate(['a', 'b', 'c'])
    'abc'
    """
''',
        "test": '''def check(candidate):
    assert candidate([]) == ''
    assert candidate(['x', 'y', 'z']) == 'xyz'
    assert candidate(['x', 'y', 'z', 'w', 'k']) == 'xyzwk'
''',
        "entry_point": "concatenate",
        "_body": "    return ''.join(strings)\n",
    },
    {
        "task_id": "HumanEval/35",
        "prompt": '''from typing import List


def max_element(l: list):
    """Return maximum element in the list.
    >>> max_element([1, 2, 3])
    3
    >>> max_element([5, 3, -5, 2, -3, 3, 9, 0, 123, 1, -10])
    123
    """
''',
        "test": '''def check(candidate):
    assert candidate([1, 2, 3]) == 3
    assert candidate([5, 3, -5, 2, -3, 3, 9, 0, 124, 1, -10]) == 124
''',
        "entry_point": "max_element",
        "_body": "    return max(l)\n",
    },
    {
        "task_id": "HumanEval/42",
        "prompt": '''def incr_list(l: list):
    """Return list with elements incremented by 1.
    >>> incr_list([1, 2, 3])
    [2, 3, 4]
    >>> incr_list([5, 3, 5, 2, 3, 3, 9, 0, 123])
    [6, 4, 6, 3, 4, 4, 10, 1, 124]
    """
''',
        "test": '''def check(candidate):
    assert candidate([]) == []
    assert candidate([3, 2, 1]) == [4, 3, 2]
    assert candidate([5, 2, 5, 2, 3, 3, 9, 0, 123]) == [6, 3, 6, 3, 4, 4, 10, 1, 124]
''',
        "entry_point": "incr_list",
        "_body": "    return [x + 1 for x in l]\n",
    },
    {
        "task_id": "HumanEval/45",
        "prompt": '''def triangle_area(a, h):
    """Given length of a side and high return area for a triangle.
    >>> triangle_area(5, 3)
    7.5
    """
''',
        "test": '''def check(candidate):
    assert candidate(5, 3) == 7.5
    assert candidate(2, 2) == 2.0
    assert candidate(10, 8) == 40.0
''',
        "entry_point": "triangle_area",
        "_body": "    return a * h / 2.0\n",
    },
    {
        "task_id": "HumanEval/53",
        "prompt": '''def add(x: int, y: int):
    """Add two numbers x and y
    >>> add(2, 3)
    5
    >>> add(5, 7)
    12
    """
''',
        "test": '''def check(candidate):
    assert candidate(0, 1) == 1
    assert candidate(1, 0) == 1
    assert candidate(2, 3) == 5
    assert candidate(5, 7) == 12
    assert candidate(7, 5) == 12
''',
        "entry_point": "add",
        "_body": "    return x + y\n",
    },
]


def make_real10_fixtures() -> None:
    from jobloop.humaneval import Solution, load_corpus, save_results

    public = [
        {k: v for k, v in problem.items() if k != "_body"} for problem in REAL_PROBLEMS
    ]
    write_corpus(FIXTURES / "real10_corpus.jsonl", public)
    corpus = load_corpus(FIXTURES / "real10_corpus.jsonl")

    solutions: dict[str, Solution] = {}
    for problem in REAL_PROBLEMS:
        task_id = problem["task_id"]
        body = problem.get("_body") or BODY_V2
        solution = Solution(task_id, body, "def check(candidate):\n    pass\n")
        outcome = run_program_inprocess(
            assemble_scoring_program(corpus[task_id], solution)
        )
        assert outcome["verdict"] == "passed", (task_id, outcome)
        solutions[task_id] = solution
    save_results(solutions, FIXTURES / "real10_solutions.json")


# --- document-generation fixtures ----------------------------------------------

EXAMPLE_DOC = """0 Led Example Band
The Led Example Band was an English rock group formed in London in 1968. The band became one of the most influential acts of the 1970s and helped define album-oriented rock.

1 History
The group's history spans founding, a peak era of touring, and an eventual disbanding.

1.1 Formation
The band formed when two session musicians recruited a singer and a drummer from the Midlands club circuit.

1.2 Peak years
Between 1969 and 1975 the band released six studio albums and toured three continents, setting attendance records along the way.

2 Musical style
Their style combined blues structures with loud amplified arrangements and extended improvisation.

3 Legacy
Critics credit the band with shaping hard rock and inspiring generations of performers.
"""

REFERENCE_DOC = """0 Target Pop Trio
The Target Pop Trio is an American pop group consisting of three siblings. The group rose to fame through television appearances and a string of chart hits.

1 Career
The trio signed their first recording contract in 2005 and released a breakthrough album two years later. Major milestones include a platinum single, a world tour, a hiatus, and a widely covered reunion.

2 Artistry
The group's sound blends pop rock with dance influences, and their later work incorporates synthesizers and funk rhythms.

3 Reception
The trio has earned multiple industry awards and is noted for a devoted fanbase and strong touring revenue.
"""


TARGET_GROUND_TRUTH = """0 Target Pop Trio
The Target Pop Trio is an American pop group of three siblings from New Jersey, formed in 2005. The group rose to prominence through television tie-ins and a run of platinum singles, took a hiatus in 2013, and reunited in 2019 to renewed chart success.
"""


def make_wikigen_fixtures() -> None:
    (FIXTURES / "wikigen").mkdir(parents=True, exist_ok=True)
    (FIXTURES / "wikigen" / "example.txt").write_text(EXAMPLE_DOC, encoding="utf-8")
    (FIXTURES / "wikigen" / "target.txt").write_text(
        TARGET_GROUND_TRUTH, encoding="utf-8"
    )
    refs = FIXTURES / "wikigen" / "references"
    refs.mkdir(parents=True, exist_ok=True)
    (refs / "target_overview.txt").write_text(REFERENCE_DOC, encoding="utf-8")
    config = {
        "example": "Led Example Band",
        "target": "Target Pop Trio",
        "example_file": "example.txt",
        "reference_dir": "references",
        "target_file": "target.txt",
        "sections": ["0"],
    }
    (FIXTURES / "wikigen" / "config.json").write_text(
        json.dumps(config, indent=2) + "\n", encoding="utf-8"
    )

    example_doc = parse_document(EXAMPLE_DOC, title="Led Example Band")
    job = build_docgen_job(example_doc, "Target Pop Trio", ["0"])
    save_job_file(job, FIXTURES / "wikigen_job.json")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    make_humaneval2_fixtures()
    make_toy_fixtures()
    make_real10_fixtures()
    make_wikigen_fixtures()
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
