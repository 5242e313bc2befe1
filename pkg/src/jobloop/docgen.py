"""Template-guided document generation with retrieval support.

Drafts a new document about a target subject section by section, using an
existing example document as the structural template and a chunked, embedded
reference corpus for retrieval and question answering.
"""

from __future__ import annotations

import ast
import hashlib
import json
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from jobloop.backends import Backend, BackendError, RetryableBackendError
from jobloop.chat import ChatRequest, Turn
from jobloop.jobs import (
    JobDescription,
    JobValidationError,
    Task,
    validate_job_description,
)
from jobloop.tools import (
    ToolDescriptor,
    ToolFailure,
    ToolOutput,
    ToolParam,
    ToolRegistry,
)

HEADING_RE = re.compile(r"^(\d+(?:\.\d+)*) (.*)$")

# The drafting tasks branch on this exact phrase when a section body is empty.
NO_CONTENT_MARKER = "no content present"


# --- document model ----------------------------------------------------------


@dataclass
class DocSection:
    number: str
    heading: str
    body: str = ""
    children: list["DocSection"] = field(default_factory=list)


@dataclass
class DocumentTree:
    title: str
    sections: list[DocSection] = field(default_factory=list)


def parse_document(text: str, title: str = "") -> DocumentTree:
    """Parse headed plain text with numbered headings into a tree.

    A heading line looks like ``1.2 Early years``; everything until the next
    heading is the body. Dotted numbers define the hierarchy and every parent
    must appear before its children.
    """
    tree = DocumentTree(title=title)
    by_number: dict[str, DocSection] = {}
    current: DocSection | None = None
    body_lines: list[str] = []

    def _flush() -> None:
        if current is not None:
            body = "\n".join(body_lines)
            current.body = body.strip("\n")

    for line in text.splitlines():
        match = HEADING_RE.match(line)
        if match:
            _flush()
            number, heading = match.group(1), match.group(2)
            if number in by_number:
                raise ValueError(f"duplicate section number {number!r}")
            current = DocSection(number=number, heading=heading)
            by_number[number] = current
            body_lines = []
            if "." in number:
                parent = by_number.get(number.rsplit(".", 1)[0])
                if parent is None:
                    raise ValueError(f"section {number!r} appears before its parent")
                parent.children.append(current)
            else:
                tree.sections.append(current)
        elif current is not None:
            body_lines.append(line)
    _flush()
    return tree


def iter_sections(tree: DocumentTree):
    """Pre-order walk over all sections."""

    def _walk(sections: list[DocSection]):
        for section in sections:
            yield section
            yield from _walk(section.children)

    yield from _walk(tree.sections)


def find_section(tree: DocumentTree, number: str) -> DocSection | None:
    for section in iter_sections(tree):
        if section.number == number:
            return section
    return None


def serialize_document(tree: DocumentTree) -> str:
    parts: list[str] = []
    for section in iter_sections(tree):
        parts.append(f"{section.number} {section.heading}")
        if section.body:
            parts.append(section.body)
    return "\n".join(parts) + ("\n" if parts else "")


def format_toc(tree: DocumentTree) -> str:
    """One line per section, children indented two spaces per depth level."""
    lines = []
    for section in iter_sections(tree):
        depth = section.number.count(".")
        lines.append(f"{'  ' * depth}{section.number} {section.heading}")
    return "\n".join(lines)


# --- chunking, embedding, retrieval ------------------------------------------


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    source_section: str
    text: str


@dataclass
class ChunkIndex:
    chunks: list[Chunk]
    embeddings: dict[str, np.ndarray]
    embedder_id: str

    def __post_init__(self) -> None:
        dims = {v.shape for v in self.embeddings.values()}
        if len(dims) > 1:
            raise ValueError("embeddings must share one dimension")


class HashingEmbedder:
    """Deterministic token-hash bag projected to 64 dimensions, unit-normalized.

    The test-default embedder; a live embedding backend can replace it behind
    the same callable surface.
    """

    embedder_id = "hash-bag-64"
    dim = 64

    def __call__(self, text: str) -> np.ndarray:
        vector = np.zeros(self.dim, dtype=np.float64)
        for token in re.findall(r"[\w']+", text.lower()):
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            vector[int.from_bytes(digest[:8], "big") % self.dim] += 1.0
        norm = np.linalg.norm(vector)
        if norm > 0:
            vector /= norm
        return vector


def split_into_chunks(body: str, chunk_chars: int) -> list[str]:
    """Split at paragraph boundaries where possible, hard-split otherwise."""
    paragraphs = [p for p in body.split("\n\n") if p.strip()]
    pieces: list[str] = []
    for paragraph in paragraphs:
        if len(paragraph) <= chunk_chars:
            pieces.append(paragraph)
        else:
            pieces.extend(
                paragraph[i : i + chunk_chars]
                for i in range(0, len(paragraph), chunk_chars)
            )
    chunks: list[str] = []
    current = ""
    for piece in pieces:
        if not current:
            current = piece
        elif len(current) + 2 + len(piece) <= chunk_chars:
            current = current + "\n\n" + piece
        else:
            chunks.append(current)
            current = piece
    if current:
        chunks.append(current)
    return chunks


def build_chunk_index(
    doc: DocumentTree,
    embedder: Callable[[str], np.ndarray],
    chunk_chars: int = 800,
    id_prefix: str = "",
) -> ChunkIndex:
    """Chunk every section body and embed each chunk. Deterministic for a
    deterministic embedder."""
    chunks: list[Chunk] = []
    embeddings: dict[str, np.ndarray] = {}
    ordinal = 0
    for section in iter_sections(doc):
        for text in split_into_chunks(section.body, chunk_chars):
            chunk_id = f"{id_prefix}chunk-{ordinal:04d}"
            ordinal += 1
            chunks.append(Chunk(chunk_id, section.number, text))
            embeddings[chunk_id] = embedder(text)
    embedder_id = getattr(embedder, "embedder_id", embedder.__class__.__name__)
    return ChunkIndex(chunks, embeddings, embedder_id)


def merge_indices(indices: list[ChunkIndex]) -> ChunkIndex:
    chunks: list[Chunk] = []
    embeddings: dict[str, np.ndarray] = {}
    embedder_ids = {index.embedder_id for index in indices}
    if len(embedder_ids) > 1:
        raise ValueError("cannot merge indices built with different embedders")
    for index in indices:
        for chunk in index.chunks:
            if chunk.chunk_id in embeddings:
                raise ValueError(f"duplicate chunk id {chunk.chunk_id!r}")
            chunks.append(chunk)
            embeddings[chunk.chunk_id] = index.embeddings[chunk.chunk_id]
    return ChunkIndex(chunks, embeddings, embedder_ids.pop() if embedder_ids else "")


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    norm = float(np.linalg.norm(a)) * float(np.linalg.norm(b))
    if norm == 0.0:
        return 0.0
    return float(np.dot(a, b)) / norm


def retrieve_top_k(
    index: ChunkIndex, queries: list[np.ndarray], k: int
) -> list[tuple[str, float]]:
    """Exact top-k over the whole index: per chunk the best score over all
    queries, ranked by score descending with chunk_id ascending as tie-break."""
    scores: dict[str, float] = {}
    for chunk in index.chunks:
        vector = index.embeddings[chunk.chunk_id]
        best = max(
            (cosine_similarity(query, vector) for query in queries), default=0.0
        )
        scores[chunk.chunk_id] = best
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


# --- job description ----------------------------------------------------------

SEARCH_SECTION_TASK = Task(
    task_name="Search for Document Section Text",
    details={
        "description": "Find the text of the specified section and all subsections in the example document.",
        "prerequisite_tasks": [],
        "function_call": "Call get_example_toc to get the full list of sections in the example doc and then get_text_for_sections to retrieve the text for the specified section and any relevant (sub)sections.",
        "example_call": "{{'Example Document': ['1', '1.1', '1.2']}}",
        "instructions": [
            "Use get_example_and_target_names to get the name of the target that the document should be about.",
            "The specified section should have corresponding text, even that text is blank. If you get an error, try again with different parameters",
            "Do not truncate or modify the retrieved text.",
            "If text is present, print the entire text and instruct to proceed to the next task.",
            "If the specified section is empty in the example document, then you can leave it empty in the target. In that case, you can skip all the remaining tasks and jump straight to the 'Draft New Document Section' task, which can just draft an empty section. Note that a blank section is not the same as the function returning an error.",
        ],
    },
)

UNDERSTAND_DIFFERENTIATION_TASK = Task(
    task_name="Understand Differentiation",
    details={
        "description": "Understand the context of the example document section by comparing it with similar sections. Also look at any subsections and understand how they are structured.",
        "prerequisite_tasks": ["Search for Document Section Text"],
        "instructions": [
            "Identify other sections of the example document that may contain content similar to the current section.",
            "Retrieve the text of these sections along with their section identifiers.",
            "Analyze and note down how the current section differs from these sections to prevent duplication in future work.",
        ],
        "additional_notes": [
            "Keep your notes concise and relevant for later use.",
            "If 'no content present' is observed in all section bodies that are retrieved, even after retrieving children/sub-sections, proceed to the next task.",
            "If it seems like the current section is specific to the example document, and would not make sense as part of the target document, feel free to skip the section and go on to the next one. This can happen if the example contains a section highly specific to its topic, but not relevant to the target document.",
        ],
    },
)

FIND_REFERENCES_TASK = Task(
    task_name="Find the most relevant references for the target section and all the subsections",
    details={
        "description": (
            "Call get_corresponding_target_references_for_example_sections function with a list of the current section and all subsections to retrieve these materials. to find relevant references for the target document that correspond to the example document sections you are looking at.\n"
            "    The references may not provide you with all the information you need to draft the section. Don't worry, you will get a chance to ask additional questions in the next task."
        ),
        "example_call": "['1', '1.1', '1.2']",
    },
)

ASK_QUESTIONS_TASK = Task(
    task_name="Ask additional questions",
    details={
        "description": (
            "Determine if any additional information is required to draft the section and call the \n"
            "    ask_question_about_target function to gather that information. Remember, your goal is to create a page about\n"
            "    the target, not the example. Feel free to ask as many questions as you need and keep working on this task \n"
            "    until you have the information you need. This is especially important if the initial references turn out \n"
            "    not to be useful. If you ask questions, make sure they are specific and ask directly about the target by \n"
            "    name. Do not ask questions about the example. For \n"
            '    example, ask "What are major events in Henry Thoreau\'s life" instead of "What are major events in the author\'s life?"\n'
            "    If you don't have any questions, just move on to the next section."
        ),
        "example_call": '{"prompt": "What is unusual about the formation of Cream?"}',
    },
)

DEFINE_SUBSECTIONS_TASK = Task(
    task_name="Define subsections for this section",
    details={
        "description": (
            "Define what subsections should be present within this individual section. Use the table \n"
            "    of contents from the example document and your knowledge of the target to structure the subsections.  \n"
            "    Keep in mind over differentiation of this section from other sections in the document. It is totally fine \n"
            "    to not have subsections, especially if the example document does not have them.\n"
            "    Also, remember that the subsections should be relevant for the target document. The detailed structure of \n"
            "    subsections used in the example may not be relevant for our target document."
        ),
    },
)

DRAFT_SECTION_TASK = Task(
    task_name="Draft New Document Section",
    details={
        "description": (
            "Draft a new section analogous to the example section, but about the target subject. Ensure alignment with its "
            "structure, format, and scope (from {{TaskRef:Understand Differentiation}} output). Use "
            "the section structure you defined in {{TaskRef:Define subsections for this section}}. "
            "However, the details should be related to the target and not the example document."
            "Call the save_draft_section tool to save the draft. Pass in the section number to save_draft_section"
        ),
        "guidelines": [
            "Clearly identify the section number and section heading/title at the top of the content.",
            "The new section should have its unique scope and purpose, distinct from the example section.",
            "Avoid duplicating content or including redundant information.",
            "Aim for the new section to mirror the example section in length and detail, but using content related to the target.",
            "Follow the instructions set out by {{TaskRef:Understand Differentiation}} output.",
            "Maintain consistency in documentation methodology, using the revised example as a template.",
            "Ensure content is exclusively about the target, and not the example topic.",
        ],
        "specific_instructions": [
            "Do not copy text verbatim. Include only text within the scope of the current section, as highlighted in the output of {{TaskRef:Understand Differentiation}}.",
            "Include cross-references to other sections as seen in the example if applicable.",
        ],
    },
)

PREPARE_NEXT_TASK = Task(
    task_name="Prepare for Next Document Section",
    details={
        "description": "Signal that you have completed the draft by calling complete_section",
        "function_call": "Use the complete_section function with the argument value = current section identifier.",
        "example_call": "{{'current_section_identifier': ['1.2']}}",
    },
)

DOCGEN_TASKS = (
    SEARCH_SECTION_TASK,
    UNDERSTAND_DIFFERENTIATION_TASK,
    FIND_REFERENCES_TASK,
    ASK_QUESTIONS_TASK,
    DEFINE_SUBSECTIONS_TASK,
    DRAFT_SECTION_TASK,
    PREPARE_NEXT_TASK,
)

DOCGEN_ROLE = (
    "You are a professional technical writer who drafts encyclopedia-style "
    "articles with accurate, well-structured content."
)
DOCGEN_CONTEXT = (
    "You are drafting a new document about a target subject, using an existing "
    "example document as a structural template. Work on one section at a time; "
    "the current section identifier is given in the first user message."
)


def build_docgen_job(
    example_doc: DocumentTree, target_name: str, sections: list[str]
) -> JobDescription:
    """Seven-task drafting job over the given example-document sections."""
    unknown = [s for s in sections if find_section(example_doc, s) is None]
    if unknown:
        raise ValueError(f"unknown sections: {', '.join(unknown)}")
    jd = JobDescription(
        role=DOCGEN_ROLE,
        context=DOCGEN_CONTEXT,
        task_library=DOCGEN_TASKS,
        sections=tuple(sections),
        tool_set_name="wikigen",
    )
    errors = validate_job_description(jd)
    if errors:
        raise JobValidationError(errors)
    return jd


# --- tools --------------------------------------------------------------------


@dataclass(frozen=True)
class Draft:
    section_number: str
    content: str
    saved_at: int


def _parse_sections_map(text: str) -> dict[str, list[str]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        try:
            data = ast.literal_eval(text)
        except (ValueError, SyntaxError) as exc:
            raise ToolFailure(f"could not parse sections map: {exc}")
    if not isinstance(data, dict):
        raise ToolFailure("sections map must be a mapping of document name to section numbers")
    result: dict[str, list[str]] = {}
    for name, numbers in data.items():
        if isinstance(numbers, str):
            numbers = [numbers]
        if not isinstance(numbers, (list, tuple)):
            raise ToolFailure(f"section numbers for {name!r} must be a list")
        result[str(name)] = [str(n) for n in numbers]
    return result


QA_SYSTEM_PROMPT = (
    "Answer the question using only the provided context passages. If the "
    "context does not contain the answer, say that the context is insufficient."
)


class WikigenTools:
    """Tool set for the document-generation workflow.

    Indices are immutable after construction; the draft store serializes
    writes; everything else is pure.
    """

    def __init__(
        self,
        example_name: str,
        target_name: str,
        example_doc: DocumentTree,
        example_index: ChunkIndex,
        target_index: ChunkIndex,
        embedder: Callable[[str], np.ndarray],
        sections: list[str],
        backend: Backend | None = None,
        model_id: str = "scripted",
        temperature: float = 0.0,
        out_dir: str | Path | None = None,
        reference_top_k: int = 10,
        qa_top_k: int = 5,
        qa_max_attempts: int = 3,
    ) -> None:
        self.example_name = example_name
        self.target_name = target_name
        self.example_doc = example_doc
        self.example_index = example_index
        self.target_index = target_index
        self.embedder = embedder
        self.sections = list(sections)
        self.backend = backend
        self.model_id = model_id
        self.temperature = temperature
        self.out_dir = Path(out_dir) if out_dir else None
        self.reference_top_k = reference_top_k
        self.qa_top_k = qa_top_k
        self.qa_max_attempts = qa_max_attempts
        self.drafts: dict[str, Draft] = {}
        self.qa_cache: dict[tuple[str, str], str] = {}
        self.qa_backend_calls = 0
        self._save_counter = 0
        self._lock = threading.Lock()
        self._docs = {example_name: example_doc}

    # -- pure lookups --

    def get_example_and_target_names(self) -> dict[str, str]:
        return {"example": self.example_name, "target": self.target_name}

    def get_example_toc(self) -> str:
        return f"Table of Contents:\n\n{format_toc(self.example_doc)}"

    def get_text_for_sections(self, sections_dict_str: str) -> str:
        requested = _parse_sections_map(sections_dict_str)
        parts: list[str] = []
        for doc_name, numbers in requested.items():
            doc = self._docs.get(doc_name)
            if doc is None:
                raise ToolFailure(f"unknown document {doc_name!r}")
            for number in numbers:
                section = find_section(doc, number)
                if section is None:
                    raise ToolFailure(
                        f"unknown section {number!r} in document {doc_name!r}"
                    )
                body = section.body if section.body.strip() else NO_CONTENT_MARKER
                parts.append(f"{section.number} {section.heading}\n{body}")
        return "\n\n".join(parts)

    # -- retrieval --

    def get_corresponding_target_references_for_example_sections(
        self, section_numbers: list[str] | str
    ) -> str:
        if isinstance(section_numbers, str):
            try:
                section_numbers = ast.literal_eval(section_numbers)
            except (ValueError, SyntaxError) as exc:
                raise ToolFailure(f"could not parse section list: {exc}")
        if not isinstance(section_numbers, (list, tuple)):
            raise ToolFailure("section_numbers must be a list of section numbers")
        if not self.target_index.chunks:
            raise ToolFailure("target index empty")
        wanted = {str(n) for n in section_numbers}
        queries = [
            self.example_index.embeddings[chunk.chunk_id]
            for chunk in self.example_index.chunks
            if chunk.source_section in wanted
        ]
        if not queries:
            raise ToolFailure(
                f"no reference chunks found for sections {sorted(wanted)}"
            )
        top = retrieve_top_k(self.target_index, queries, self.reference_top_k)
        by_id = {chunk.chunk_id: chunk for chunk in self.target_index.chunks}
        return "\n\n".join(by_id[chunk_id].text for chunk_id, _ in top)

    def ask_question_about_target(self, prompt: str) -> str:
        if not prompt.strip():
            raise ToolFailure("empty question")
        key = (self.target_name, prompt)
        with self._lock:
            if key in self.qa_cache:
                return self.qa_cache[key]
        if self.backend is None:
            raise ToolFailure("no backend configured for question answering")
        ranked = retrieve_top_k(
            self.target_index, [self.embedder(prompt)], self.qa_top_k
        )
        by_id = {chunk.chunk_id: chunk for chunk in self.target_index.chunks}
        context = "\n\n".join(by_id[chunk_id].text for chunk_id, _ in ranked)
        request = ChatRequest(
            model_id=self.model_id,
            turns=(
                Turn("system", QA_SYSTEM_PROMPT),
                Turn("user", f"Context:\n\n{context}\n\nQuestion: {prompt}"),
            ),
            temperature=self.temperature,
        )
        attempt = 0
        while True:
            attempt += 1
            try:
                response = self.backend.complete(request)
                break
            except RetryableBackendError as exc:
                if attempt >= self.qa_max_attempts:
                    raise ToolFailure(f"backend failure: {exc}")
            except BackendError as exc:
                raise ToolFailure(f"backend failure: {exc}")
        answer = response.assistant_text
        with self._lock:
            self.qa_backend_calls += 1
            self.qa_cache[key] = answer
        return answer

    # -- drafts --

    def save_draft_section(self, section_number: str, content: str) -> ToolOutput:
        if section_number not in self.sections:
            raise ToolFailure(f"section {section_number!r} is not part of this job")
        with self._lock:
            self._save_counter += 1
            self.drafts[section_number] = Draft(
                section_number, content, self._save_counter
            )
            if self.out_dir:
                drafts_dir = self.out_dir / "drafts"
                drafts_dir.mkdir(parents=True, exist_ok=True)
                safe = section_number.replace("/", "_")
                (drafts_dir / f"{safe}.md").write_text(content, encoding="utf-8")
        return ToolOutput(
            f"Draft for section {section_number} saved.",
            assets={f"draft_{section_number}": content},
        )

    def assemble_document(self) -> str:
        """Latest draft per section, concatenated in the job's section order."""
        parts = [
            self.drafts[number].content
            for number in self.sections
            if number in self.drafts
        ]
        return "\n\n".join(parts)

    def register_into(self, registry: ToolRegistry) -> None:
        registry.register(
            ToolDescriptor(
                name="get_example_and_target_names",
                description="Gets the names for the example and target documents.",
            ),
            self.get_example_and_target_names,
        )
        registry.register(
            ToolDescriptor(
                name="get_example_toc",
                description=(
                    "Retrieves and formats the table of contents for the example "
                    "document."
                ),
            ),
            self.get_example_toc,
        )
        registry.register(
            ToolDescriptor(
                name="get_text_for_sections",
                description="Extracts text from specified sections of documents.",
                params=(
                    ToolParam(
                        "sections_dict_str",
                        "string",
                        "A JSON string mapping document names to their respective "
                        "section numbers.",
                    ),
                ),
            ),
            self.get_text_for_sections,
        )
        registry.register(
            ToolDescriptor(
                name="get_corresponding_target_references_for_example_sections",
                description=(
                    "Retrieves target document references corresponding to example "
                    "document sections."
                ),
                params=(
                    ToolParam(
                        "section_numbers",
                        "list",
                        "A list of section numbers from the example document.",
                    ),
                ),
            ),
            self.get_corresponding_target_references_for_example_sections,
        )
        registry.register(
            ToolDescriptor(
                name="ask_question_about_target",
                description=(
                    "Asks a question about the target subject and returns a "
                    "response grounded in the reference corpus."
                ),
                params=(
                    ToolParam(
                        "prompt",
                        "string",
                        "The question to ask about the target subject.",
                    ),
                ),
            ),
            self.ask_question_about_target,
        )
        registry.register(
            ToolDescriptor(
                name="save_draft_section",
                description="Saves the draft content for a specific section.",
                params=(
                    ToolParam(
                        "section_number",
                        "string",
                        "The section number to save the draft for.",
                    ),
                    ToolParam("content", "string", "The content of the draft section."),
                ),
            ),
            self.save_draft_section,
        )


# --- judging ------------------------------------------------------------------

RUBRIC_INTRO = (
    "Your job is to compare a generated document versus a human-created "
    "reference. Rate the document using an integer from 0-6 using the scale "
    "below."
)

RUBRIC_LEVELS = (
    "0 - Irrelevant: The AI document is completely off-topic or unusable.",
    "1 - Very Poor: Major errors or missing information make the document largely ineffective.",
    "2 - Insufficient: Significant elements are missing, and extensive revisions are needed.",
    "3 - Marginal: Meets the basic requirements but contains several deficiencies.",
    "4 - Satisfactory: Acceptable as a first draft but requires refinement.",
    "5 - Comparable: Matches the quality and completeness of the ground truth document.",
    "6 - Outstanding: Surpasses the ground truth in quality, detail, and presentation.",
)

RUBRIC_FOOTER = "Have the scores be discrete (no floats)."


def build_evaluation_prompt(generated: str, reference: str) -> str:
    """The 0-6 judge prompt: rubric, then the two documents under headers."""
    if not generated:
        raise ValueError("generated document is empty")
    if not reference:
        raise ValueError("reference document is empty")
    return (
        RUBRIC_INTRO
        + "\n\n"
        + "\n".join(RUBRIC_LEVELS)
        + "\n"
        + RUBRIC_FOOTER
        + "\n\nGENERATED:\n"
        + generated
        + "\n\nREFERENCE:\n"
        + reference
        + "\n"
    )


# --- quality summary ------------------------------------------------------------


@dataclass(frozen=True)
class QualityTable:
    categories: tuple[str, ...]
    models: tuple[str, ...]
    cells: dict[tuple[str, str], str]
    best_model_choice: dict[str, str]
    best_model_cells: dict[str, str]
    overall: dict[str, str]
    overall_best: str


def _cell(scores: list[int]) -> str:
    if not scores:
        return "n/a"
    ge4 = sum(1 for s in scores if s >= 4)
    ge5 = sum(1 for s in scores if s >= 5)
    n = len(scores)
    return f"{round(100.0 * ge4 / n, 1):.1f}% / {round(100.0 * ge5 / n, 1):.1f}%"


def _rates(scores: list[int]) -> tuple[float, float]:
    n = len(scores)
    return (
        sum(1 for s in scores if s >= 4) / n,
        sum(1 for s in scores if s >= 5) / n,
    )


def summarize_quality_table(
    scores: dict[tuple[str, str], list[int]]
) -> QualityTable:
    """Per-cell first-draft (>=4) and high-quality (>=5) percentages, plus the
    best-model composition: per category pick the strongest model, then
    aggregate those picks."""
    for (category, model), values in scores.items():
        for value in values:
            if not (0 <= value <= 6):
                raise ValueError(
                    f"score {value} for ({category}, {model}) outside 0..6"
                )

    categories = tuple(sorted({c for c, _ in scores}))
    models = tuple(sorted({m for _, m in scores}))
    cells = {
        (category, model): _cell(scores.get((category, model), []))
        for category in categories
        for model in models
    }

    best_model_choice: dict[str, str] = {}
    best_model_cells: dict[str, str] = {}
    best_scores: list[int] = []
    for category in categories:
        candidates = [
            model for model in models if scores.get((category, model))
        ]
        if not candidates:
            best_model_cells[category] = "n/a"
            continue
        chosen = sorted(
            candidates,
            key=lambda model: (
                tuple(-r for r in _rates(scores[(category, model)])),
                model,
            ),
        )[0]
        best_model_choice[category] = chosen
        best_model_cells[category] = _cell(scores[(category, chosen)])
        best_scores.extend(scores[(category, chosen)])

    overall = {
        model: _cell(
            [s for category in categories for s in scores.get((category, model), [])]
        )
        for model in models
    }
    return QualityTable(
        categories=categories,
        models=models,
        cells=cells,
        best_model_choice=best_model_choice,
        best_model_cells=best_model_cells,
        overall=overall,
        overall_best=_cell(best_scores),
    )


# --- configuration ---------------------------------------------------------------


@dataclass(frozen=True)
class DocgenSetup:
    tools: WikigenTools
    job: JobDescription
    target_reference: str | None = None  # ground-truth article for judging


def load_docgen_config(
    path: str | Path,
    backend: Backend | None = None,
    model_id: str = "scripted",
    temperature: float = 0.0,
    out_dir: str | Path | None = None,
) -> DocgenSetup:
    """Build tools and job from a config file naming the example page, target
    page, and reference corpus directory."""
    config_path = Path(path)
    with open(config_path, encoding="utf-8") as handle:
        config = json.load(handle)
    base = config_path.parent

    example_name = config["example"]
    target_name = config["target"]
    example_file = base / config["example_file"]
    example_doc = parse_document(
        example_file.read_text(encoding="utf-8"), title=example_name
    )

    embedder = HashingEmbedder()
    chunk_chars = int(config.get("chunk_chars", 800))
    example_index = build_chunk_index(example_doc, embedder, chunk_chars)

    reference_dir = base / config["reference_dir"]
    reference_indices = []
    for ref_path in sorted(reference_dir.glob("*.txt")):
        ref_doc = parse_document(
            ref_path.read_text(encoding="utf-8"), title=ref_path.stem
        )
        reference_indices.append(
            build_chunk_index(
                ref_doc, embedder, chunk_chars, id_prefix=f"{ref_path.stem}/"
            )
        )
    target_index = (
        merge_indices(reference_indices)
        if reference_indices
        else ChunkIndex([], {}, embedder.embedder_id)
    )

    sections = [str(s) for s in config.get("sections", [])]
    if not sections:
        sections = [section.number for section in example_doc.sections]

    target_reference = None
    if "target_file" in config:
        target_reference = (base / config["target_file"]).read_text(encoding="utf-8")

    tools = WikigenTools(
        example_name=example_name,
        target_name=target_name,
        example_doc=example_doc,
        example_index=example_index,
        target_index=target_index,
        embedder=embedder,
        sections=sections,
        backend=backend,
        model_id=model_id,
        temperature=temperature,
        out_dir=out_dir,
    )
    job = build_docgen_job(example_doc, target_name, sections)
    return DocgenSetup(tools=tools, job=job, target_reference=target_reference)
