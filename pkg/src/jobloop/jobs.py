"""Job descriptions and their compilation into controller-bearing prompts.

A job description bundles a role, a context, a task library, and a section
list. Compiling it produces the system message that embeds the control logic
(numbered task list, cross-references resolved) plus the per-section initial
user message.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

TASK_REF_RE = re.compile(r"\{\{TaskRef:([^{}]+)\}\}")

# Fixed wording of the setup header; recorded runs depend on it staying stable.
CONTROLLER_PREAMBLE = (
    "Work through the numbered task list below for one section at a time. "
    "Complete the tasks in order, calling the provided functions where a task "
    "requires them. When every task for the current section is finished, call "
    "the complete_section function with the current section identifier."
)


class JobValidationError(ValueError):
    """Raised when a job description violates its invariants."""

    def __init__(self, errors: list[str]) -> None:
        super().__init__("; ".join(errors))
        self.errors = errors


class TaskRefError(ValueError):
    """Raised when a cross-reference names a task that does not exist."""


@dataclass(frozen=True)
class Task:
    """One named task plus its ordered detail map.

    Detail values are strings, lists of strings, or nested ordered maps.
    """

    task_name: str
    details: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class JobDescription:
    role: str
    context: str
    task_library: tuple[Task, ...]
    sections: tuple[str, ...]
    tool_set_name: str
    pre_context_instructions: str = ""
    post_context_instructions: str = ""
    general_comments: str = ""
    initial_user_message_template: str = "Begin the task list for section {section}."


@dataclass(frozen=True)
class CompiledTemplate:
    """The two compiled artifacts that drive every section run."""

    system_message: str
    user_message_template: str

    def initial_user_message_for(self, section_id: str) -> str:
        return self.user_message_template.replace("{section}", section_id)


def _iter_detail_strings(value: Any):
    if isinstance(value, str):
        yield value
    elif isinstance(value, (list, tuple)):
        for item in value:
            yield from _iter_detail_strings(item)
    elif isinstance(value, dict):
        for item in value.values():
            yield from _iter_detail_strings(item)


def validate_job_description(jd: JobDescription) -> list[str]:
    """Return all invariant violations; an empty list means the job is valid."""
    errors: list[str] = []

    if not jd.sections:
        errors.append("sections empty")
    seen_sections: set[str] = set()
    for sid in jd.sections:
        if sid in seen_sections:
            errors.append(f"duplicate section id {sid!r}")
        seen_sections.add(sid)

    names: set[str] = set()
    for index, task in enumerate(jd.task_library, start=1):
        if not task.task_name:
            errors.append(f"task {index} has an empty task_name")
            continue
        if task.task_name in names:
            errors.append(f"duplicate task name {task.task_name!r}")
        names.add(task.task_name)
        if "description" not in task.details:
            errors.append(f"task {task.task_name!r} missing 'description' detail")

    if "{section}" not in jd.initial_user_message_template:
        errors.append("initial_user_message_template missing '{section}' placeholder")

    referenced: list[str] = []
    for task in jd.task_library:
        for text in _iter_detail_strings(task.details):
            referenced.extend(TASK_REF_RE.findall(text))
    for text in (
        jd.role,
        jd.context,
        jd.pre_context_instructions,
        jd.post_context_instructions,
        jd.general_comments,
    ):
        referenced.extend(TASK_REF_RE.findall(text))
    for name in dict.fromkeys(referenced):
        if name not in names:
            errors.append(f"unknown task reference {name!r}")

    return errors


def resolve_task_refs(text: str, library: tuple[Task, ...] | list[Task]) -> str:
    """Replace each ``{{TaskRef:X}}`` with "Task N (X)", N the 1-based position."""
    positions = {task.task_name: i for i, task in enumerate(library, start=1)}

    def _sub(match: re.Match[str]) -> str:
        name = match.group(1)
        if name not in positions:
            raise TaskRefError(f"unknown task reference {name!r}")
        return f"Task {positions[name]} ({name})"

    return TASK_REF_RE.sub(_sub, text)


def _render_detail(key: str, value: Any, indent: int, lines: list[str]) -> None:
    pad = " " * indent
    if isinstance(value, dict):
        lines.append(f"{pad}{key}:")
        for sub_key, sub_value in value.items():
            _render_detail(sub_key, sub_value, indent + 2, lines)
    elif isinstance(value, (list, tuple)):
        lines.append(f"{pad}{key}:")
        for item in value:
            if isinstance(item, str):
                lines.append(f"{pad}- {item}")
            else:
                lines.append(f"{pad}- {json.dumps(item, ensure_ascii=False)}")
    elif isinstance(value, str):
        lines.append(f"{pad}{key}: {value}")
    else:
        lines.append(f"{pad}{key}: {value}")


def render_task(number: int, task: Task) -> str:
    lines = [f"Task {number} ({task.task_name}):"]
    for key, value in task.details.items():
        _render_detail(key, value, 0, lines)
    return "\n".join(lines)


def compile_master_template(jd: JobDescription) -> CompiledTemplate:
    """Compile a valid job into its system message and user-message template.

    Deterministic: equal inputs yield byte-identical output. Layout order is
    setup header (role + context), pre-context instructions, numbered task
    list, post-context instructions, general comments.
    """
    errors = validate_job_description(jd)
    if errors:
        raise JobValidationError(errors)

    parts: list[str] = [jd.role, jd.context, CONTROLLER_PREAMBLE]
    if jd.pre_context_instructions:
        parts.append(jd.pre_context_instructions)
    if jd.task_library:
        task_block = "\n\n".join(
            render_task(i, task) for i, task in enumerate(jd.task_library, start=1)
        )
        parts.append("Tasks:\n\n" + task_block)
    if jd.post_context_instructions:
        parts.append(jd.post_context_instructions)
    if jd.general_comments:
        parts.append(jd.general_comments)

    system_message = resolve_task_refs("\n\n".join(parts), jd.task_library)
    return CompiledTemplate(
        system_message=system_message,
        user_message_template=jd.initial_user_message_template,
    )


# --- declarative job files -------------------------------------------------


def job_to_dict(jd: JobDescription) -> dict[str, Any]:
    data: dict[str, Any] = {
        "role": jd.role,
        "context": jd.context,
        "tasks": [
            {"task_name": t.task_name, "details": t.details} for t in jd.task_library
        ],
        "sections": list(jd.sections),
        "tool_set": jd.tool_set_name,
        "general_comments": jd.general_comments,
        "initial_user_message": jd.initial_user_message_template,
    }
    if jd.pre_context_instructions:
        data["pre_context_instructions"] = jd.pre_context_instructions
    if jd.post_context_instructions:
        data["post_context_instructions"] = jd.post_context_instructions
    return data


def job_from_dict(data: dict[str, Any]) -> JobDescription:
    missing = [
        key
        for key in ("role", "context", "tasks", "sections", "tool_set", "initial_user_message")
        if key not in data
    ]
    if missing:
        raise JobValidationError([f"job file missing key {key!r}" for key in missing])
    tasks = tuple(
        Task(task_name=t["task_name"], details=dict(t.get("details") or {}))
        for t in data["tasks"]
    )
    return JobDescription(
        role=data["role"],
        context=data["context"],
        task_library=tasks,
        sections=tuple(data["sections"]),
        tool_set_name=data["tool_set"],
        pre_context_instructions=data.get("pre_context_instructions", ""),
        post_context_instructions=data.get("post_context_instructions", ""),
        general_comments=data.get("general_comments", ""),
        initial_user_message_template=data["initial_user_message"],
    )


def load_job_file(path: str | Path) -> JobDescription:
    with open(path, encoding="utf-8") as handle:
        return job_from_dict(json.load(handle))


def save_job_file(jd: JobDescription, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(job_to_dict(jd), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
