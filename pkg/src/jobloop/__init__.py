"""Controller-embedded LM workflow engine.

Compiles declarative job descriptions into system prompts that carry the
control logic, then runs an iterative model/tool loop per section with loop
detection, error recovery, caching, and deterministic replay.
"""

from jobloop.backends import (
    Backend,
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
from jobloop.chat import ChatRequest, ChatResponse, TokenUsage, Turn, fingerprint
from jobloop.engine import (
    Context,
    EngineConfig,
    SectionState,
    detect_loop,
    pop_context,
    run_job,
    run_section,
)
from jobloop.jobs import (
    CompiledTemplate,
    JobDescription,
    JobValidationError,
    Task,
    compile_master_template,
    load_job_file,
    resolve_task_refs,
    save_job_file,
    validate_job_description,
)
from jobloop.monitor import Monitor, MonitorEvent, UsageLedger, estimate_tokens, finalize_run
from jobloop.tools import (
    CompletionFlag,
    ToolCall,
    ToolDescriptor,
    ToolFailure,
    ToolOutput,
    ToolParam,
    ToolRegistry,
    ToolResult,
)

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "BackendError",
    "CachedBackend",
    "CacheStore",
    "ChatRequest",
    "ChatResponse",
    "CompiledTemplate",
    "CompletionFlag",
    "Context",
    "EchoBackend",
    "EngineConfig",
    "InMemoryCacheStore",
    "JobDescription",
    "JobValidationError",
    "LiveBackend",
    "Monitor",
    "MonitorEvent",
    "QueueBackend",
    "RecordingBackend",
    "ReplayDivergenceError",
    "ReplayScript",
    "RetryableBackendError",
    "ScriptedBackend",
    "SectionState",
    "Task",
    "TokenUsage",
    "ToolCall",
    "ToolDescriptor",
    "ToolFailure",
    "ToolOutput",
    "ToolParam",
    "ToolRegistry",
    "ToolResult",
    "Turn",
    "UsageLedger",
    "compile_master_template",
    "detect_loop",
    "estimate_tokens",
    "fingerprint",
    "finalize_run",
    "load_job_file",
    "pop_context",
    "resolve_task_refs",
    "run_job",
    "run_section",
    "save_job_file",
    "validate_job_description",
]
