"""Read and write notebook files (nbformat 4 JSON).

Reading keeps only code cells, in document order, with each cell's source
joined into a single string. Writing produces plain nbformat-4 documents
(``nbformat_minor`` 5, deterministic cell ids, empty outputs) that load in
standard notebook tools.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MalformedNotebook

logger = logging.getLogger(__name__)

NBFORMAT_MAJOR = 4
NBFORMAT_MINOR = 5


@dataclass(frozen=True)
class CodeCell:
    """One code cell: its source text and its index in the original file."""

    source: str
    index: int


@dataclass(frozen=True)
class NotebookDocument:
    """Code cells of one notebook, in document order."""

    source_id: str
    cells: tuple[CodeCell, ...]
    language: str = "python"
    dropped_cells: int = 0

    def __len__(self) -> int:
        return len(self.cells)


def _cell_source(cell: dict) -> str:
    source = cell.get("source", "")
    if isinstance(source, list):
        return "".join(str(part) for part in source)
    return str(source)


def parse_notebook(raw: bytes | str, source_id: str = "<memory>") -> NotebookDocument:
    """Parse notebook-file JSON into its ordered code cells.

    Markdown and raw cells are dropped (counted in ``dropped_cells``).
    Raises MalformedNotebook for non-JSON input or a missing/invalid
    ``cells`` array; corpus runs catch this and skip the document.
    """
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedNotebook(f"{source_id}: not UTF-8 text") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedNotebook(f"{source_id}: not JSON ({exc.msg})") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("cells"), list):
        raise MalformedNotebook(f"{source_id}: missing `cells` array")

    language = "python"
    metadata = doc.get("metadata")
    if isinstance(metadata, dict):
        kernelspec = metadata.get("kernelspec") or {}
        language_info = metadata.get("language_info") or {}
        language = kernelspec.get("language") or language_info.get("name") or "python"

    cells = []
    dropped = 0
    for index, cell in enumerate(doc["cells"]):
        if isinstance(cell, dict) and cell.get("cell_type") == "code":
            cells.append(CodeCell(source=_cell_source(cell), index=index))
        else:
            dropped += 1
    return NotebookDocument(
        source_id=source_id,
        cells=tuple(cells),
        language=str(language),
        dropped_cells=dropped,
    )


def read_corpus_dir(corpus_dir: str | Path) -> tuple[list[NotebookDocument], list[tuple[str, str]]]:
    """Parse every ``.ipynb`` file under a directory, in sorted-path order.

    Returns (documents, skipped) where skipped holds (path, reason) pairs
    for files that could not be parsed. A bad file never aborts the run.
    """
    corpus_dir = Path(corpus_dir)
    docs: list[NotebookDocument] = []
    skipped: list[tuple[str, str]] = []
    for path in sorted(corpus_dir.rglob("*.ipynb")):
        try:
            docs.append(parse_notebook(path.read_bytes(), source_id=path.name))
        except MalformedNotebook as exc:
            logger.warning("skipping %s: %s", path, exc)
            skipped.append((path.name, str(exc)))
    return docs, skipped


@dataclass
class NotebookBuilder:
    """Accumulates cells and renders an nbformat-4 document.

    Cell ids are deterministic ("cell-0", "cell-1", ...) so identical
    sessions export byte-identical files.
    """

    cells: list[dict] = field(default_factory=list)

    def add_markdown(self, text: str) -> None:
        self.cells.append(
            {
                "id": f"cell-{len(self.cells)}",
                "cell_type": "markdown",
                "metadata": {},
                "source": text,
            }
        )

    def add_code(self, source: str) -> None:
        self.cells.append(
            {
                "id": f"cell-{len(self.cells)}",
                "cell_type": "code",
                "metadata": {},
                "execution_count": None,
                "outputs": [],
                "source": source,
            }
        )

    def to_document(self) -> dict:
        return {
            "nbformat": NBFORMAT_MAJOR,
            "nbformat_minor": NBFORMAT_MINOR,
            "metadata": {
                "kernelspec": {
                    "name": "python3",
                    "display_name": "Python 3",
                    "language": "python",
                },
                "language_info": {"name": "python"},
            },
            "cells": list(self.cells),
        }

    def to_bytes(self) -> bytes:
        return json.dumps(self.to_document(), indent=1, ensure_ascii=False).encode("utf-8")
