from __future__ import annotations

from pathlib import Path

import pytest

from jobloop.jobs import JobDescription, Task

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"
SANDBOX_MAIN = REPO_ROOT / "sandbox" / "dist" / "main.js"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def make_job(
    sections: tuple[str, ...] = ("s1",),
    tasks: tuple[Task, ...] | None = None,
    **overrides,
) -> JobDescription:
    """Small valid job for engine-level tests."""
    if tasks is None:
        tasks = (
            Task("Say hello", {"description": "Greet the user."}),
            Task("Wrap up", {"description": "Call complete_section when done."}),
        )
    defaults = dict(
        role="You are a terse assistant.",
        context="You are exercising the engine in a test.",
        task_library=tasks,
        sections=sections,
        tool_set_name="test",
    )
    defaults.update(overrides)
    return JobDescription(**defaults)
