"""The linear notebook session: cells, panels, and exports.

A session is a strictly linear document. Panel i precedes cell i, cell i
consumes cell i-1's output (cell 0 consumes the dataset), and there is
always exactly one more panel than there are cells — except immediately
after a failed execution, where the error cell is a dead end with no panel
under it until it is replaced or deleted. Replacing or deleting cell i
removes everything after i; cursors roll back to their recorded state and
re-advance along the new chain.

Cursor lists are snapshotted per panel, which is what makes rollback a
constant-time truncation: recommendations depend only on the current
cursor states, never on how the session got there.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from .advisor import (
    AdvisorCursor,
    RecommendationPanel,
    initial_panel,
    panel_for_cursors,
    select_step,
)
from .catalog import AnalysisBlock, Catalog
from .errors import CellErrored, EmptySession, StalePanel
from .graph import RecommendationGraph
from .kernel import ExecutionResult, TablePreview
from .notebooks import NotebookBuilder, parse_notebook
from .tabular import DatasetHandle

PREAMBLE_VARIABLE = "df_0"


@dataclass
class NotebookCell:
    cell_index: int
    block_id: str
    name: str
    description: str
    script: str
    progress: tuple[str, ...]
    execution_status: str  # "ok" | "error"
    output_preview: TablePreview | None = None
    full_row_count: int = 0
    raw_results: str = ""
    images: tuple[tuple[str, bytes], ...] = ()
    error_message: str | None = None
    output_ref: str | None = None
    frame_hash: str | None = None

    @property
    def ok(self) -> bool:
        return self.execution_status == "ok"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class Session:
    session_id: str
    dataset: DatasetHandle
    graphs: dict[str, RecommendationGraph]
    catalog: Catalog
    cells: list[NotebookCell] = field(default_factory=list)
    panels: list[RecommendationPanel] = field(default_factory=list)
    cursor_history: list[list[AdvisorCursor]] = field(default_factory=list)
    created_at: str = field(default_factory=_now)
    updated_at: str = field(default_factory=_now)
    live: bool = True  # False once restored from a snapshot without frames

    def __post_init__(self) -> None:
        if not self.panels:
            cursors, panel = initial_panel(
                self.graphs, self.catalog, list(self.dataset.schema), self.dataset.row_count
            )
            self.cursor_history = [cursors]
            self.panels = [panel]

    # -- current input -------------------------------------------------

    @property
    def cursors(self) -> list[AdvisorCursor]:
        return self.cursor_history[-1]

    @property
    def has_trailing_panel(self) -> bool:
        return len(self.panels) == len(self.cells) + 1

    def current_input_ref(self, dataset_ref: str) -> str:
        """The frame the next selected block will run against."""
        return self.input_ref_for_panel(len(self.cells), dataset_ref)

    def input_ref_for_panel(self, panel_index: int, dataset_ref: str) -> str:
        """The frame feeding a block selected at the given panel: the output
        of the preceding cell, or the dataset itself for panel 0."""
        for cell in reversed(self.cells[:panel_index]):
            if cell.ok and cell.output_ref:
                return cell.output_ref
        return dataset_ref

    def input_shape(self) -> tuple[list[tuple[str, str]], int]:
        """Schema and row count of the frame behind the trailing panel."""
        for cell in reversed(self.cells):
            if cell.ok and cell.output_preview is not None:
                return list(cell.output_preview.schema), cell.full_row_count
        return list(self.dataset.schema), self.dataset.row_count

    # -- mutations -----------------------------------------------------

    def _build_cell(
        self, index: int, block: AnalysisBlock, execution: ExecutionResult
    ) -> NotebookCell:
        previous = self.cells[index - 1].progress if index > 0 else ()
        return NotebookCell(
            cell_index=index,
            block_id=block.block_id,
            name=block.name,
            description=block.description,
            script=block.code,
            progress=previous + (block.name,),
            execution_status=execution.status,
            output_preview=execution.table_preview,
            full_row_count=execution.full_row_count,
            raw_results=execution.stdout_text,
            images=execution.images,
            error_message=execution.error_message,
            output_ref=execution.output_ref,
            frame_hash=execution.frame_hash,
        )

    def append_cell(
        self, advisor_id: str, block: AnalysisBlock, execution: ExecutionResult
    ) -> NotebookCell:
        """Attach an executed step under the trailing panel.

        A failed execution appends an error cell but no new panel: the
        notebook cannot be extended past it, only repaired.
        """
        if not self.has_trailing_panel:
            raise StalePanel(
                "the last cell failed; replace or delete it before continuing"
            )
        cell = self._build_cell(len(self.cells), block, execution)
        panel = self.panels[-1]
        panel.selected = block.block_id
        panel.selected_advisor = advisor_id
        self.cells.append(cell)
        if execution.ok:
            new_cursors = select_step(
                self.cursors, advisor_id, block, self.graphs, self.catalog
            )
            schema, rows = self.input_shape()
            self.cursor_history.append(new_cursors)
            self.panels.append(
                panel_for_cursors(
                    new_cursors, self.graphs, self.catalog, schema, rows,
                    panel_index=len(self.cells),
                )
            )
        self.updated_at = _now()
        return cell

    def replace_cell(
        self,
        panel_index: int,
        advisor_id: str,
        block: AnalysisBlock,
        execution: ExecutionResult,
    ) -> NotebookCell:
        """Re-select at an earlier panel: downstream cells are removed, not
        re-executed, and cursors re-advance along the new chain."""
        if panel_index >= len(self.cells):
            raise StalePanel(f"panel {panel_index} has no cell to replace")
        self._truncate(panel_index)
        return self.append_cell(advisor_id, block, execution)

    def delete_cell(self, cell_index: int) -> None:
        """Remove a cell and everything downstream of it."""
        if cell_index >= len(self.cells):
            raise StalePanel(f"no cell at index {cell_index}")
        self._truncate(cell_index)
        self.updated_at = _now()

    def _truncate(self, index: int) -> None:
        self.cells = self.cells[:index]
        self.panels = self.panels[: index + 1]
        self.cursor_history = self.cursor_history[: index + 1]
        self.panels[-1].selected = None
        self.panels[-1].selected_advisor = None

    # -- exports ---------------------------------------------------------

    def _dataset_filename(self) -> str:
        name = self.dataset.name
        return name if name.endswith(".csv") else f"{name}.csv"

    def _preamble(self) -> str:
        return (
            "import pandas as pd\n\n"
            f'{PREAMBLE_VARIABLE} = pd.read_csv("{self._dataset_filename()}")'
        )

    def export_notebook(self) -> bytes:
        """The whole workflow as an nbformat-4 file: a dataset preamble,
        then one markdown + code pair per step."""
        if not self.cells:
            raise EmptySession("nothing to export")
        builder = NotebookBuilder()
        builder.add_code(self._preamble())
        for cell in self.cells:
            builder.add_markdown(f"## {cell.name}\n\n{cell.description}")
            builder.add_code(
                f"{cell.script}\n\ndf_{cell.cell_index + 1} = analyze(df_{cell.cell_index})"
            )
        return builder.to_bytes()

    def export_cell_notebook(self, cell_index: int) -> bytes:
        """One analysis step as a standalone notebook."""
        if cell_index >= len(self.cells):
            raise StalePanel(f"no cell at index {cell_index}")
        cell = self.cells[cell_index]
        builder = NotebookBuilder()
        builder.add_code(self._preamble())
        builder.add_markdown(f"## {cell.name}\n\n{cell.description}")
        builder.add_code(f"{cell.script}\n\ndf_out = analyze({PREAMBLE_VARIABLE})")
        return builder.to_bytes()

    def export_filename(self) -> str:
        return f"{self.dataset.name}_analysis.ipynb"

    def export_csv(self, cell_index: int, executor) -> bytes:
        """Full output frame of a cell, fetched from the executor's store."""
        if cell_index >= len(self.cells):
            raise StalePanel(f"no cell at index {cell_index}")
        cell = self.cells[cell_index]
        if not cell.ok or cell.output_ref is None:
            raise CellErrored(f"cell {cell_index} has no output frame")
        return executor.export_frame_csv(cell.output_ref)


def recover_block_sequence(notebook_bytes: bytes, catalog: Catalog) -> list[str]:
    """Read an exported notebook back into its ordered block ids.

    Each exported code cell starts with the verbatim block code; cells that
    match no catalog block (the dataset preamble) are skipped. When one
    block's code is a prefix of another's, the longest match wins.
    """
    doc = parse_notebook(notebook_bytes, source_id="<export>")
    recovered = []
    for cell in doc.cells:
        best: tuple[int, str] | None = None
        for block in catalog:
            if cell.source.startswith(block.code):
                candidate = (len(block.code), block.block_id)
                if best is None or candidate > best:
                    best = candidate
        if best is not None:
            recovered.append(best[1])
    return recovered


# -- snapshots ----------------------------------------------------------


def session_snapshot(session: Session) -> dict:
    """JSON-serializable session state, excluding kernel frame contents."""

    def preview_dict(preview: TablePreview | None) -> dict | None:
        if preview is None:
            return None
        return {
            "schema": [[c, k] for c, k in preview.schema],
            "rows": [list(row) for row in preview.rows],
        }

    return {
        "session_id": session.session_id,
        "created_at": session.created_at,
        "updated_at": session.updated_at,
        "dataset": {
            "dataset_id": session.dataset.dataset_id,
            "name": session.dataset.name,
            "schema": [[c, k] for c, k in session.dataset.schema],
            "row_count": session.dataset.row_count,
        },
        "cells": [
            {
                "cell_index": cell.cell_index,
                "block_id": cell.block_id,
                "name": cell.name,
                "description": cell.description,
                "script": cell.script,
                "progress": list(cell.progress),
                "execution_status": cell.execution_status,
                "output_preview": preview_dict(cell.output_preview),
                "full_row_count": cell.full_row_count,
                "raw_results": cell.raw_results,
                "images": [
                    {"name": name, "png_base64": base64.b64encode(data).decode("ascii")}
                    for name, data in cell.images
                ],
                "error_message": cell.error_message,
                "frame_hash": cell.frame_hash,
            }
            for cell in session.cells
        ],
        "panels": [
            {
                "panel_index": panel.panel_index,
                "per_advisor": {
                    aid: [[bid, prob] for bid, prob in ranked]
                    for aid, ranked in panel.per_advisor.items()
                },
                "selected": panel.selected,
                "selected_advisor": panel.selected_advisor,
            }
            for panel in session.panels
        ],
        "cursor_history": [
            [[cursor.advisor_id, cursor.state] for cursor in cursors]
            for cursors in session.cursor_history
        ],
    }


def session_from_snapshot(
    doc: dict, graphs: dict[str, RecommendationGraph], catalog: Catalog
) -> Session:
    """Rebuild a session from its snapshot.

    Output refs are not restored: the session comes back ``live=False`` and
    must be replayed against a kernel before it can execute new steps.
    """
    dataset = DatasetHandle(
        dataset_id=doc["dataset"]["dataset_id"],
        name=doc["dataset"]["name"],
        schema=tuple((c, k) for c, k in doc["dataset"]["schema"]),
        row_count=int(doc["dataset"]["row_count"]),
    )
    session = Session(
        session_id=doc["session_id"],
        dataset=dataset,
        graphs=graphs,
        catalog=catalog,
        created_at=doc["created_at"],
        updated_at=doc["updated_at"],
        live=False,
    )
    session.cells = [
        NotebookCell(
            cell_index=int(c["cell_index"]),
            block_id=c["block_id"],
            name=c["name"],
            description=c["description"],
            script=c["script"],
            progress=tuple(c["progress"]),
            execution_status=c["execution_status"],
            output_preview=(
                TablePreview(
                    schema=tuple((col, k) for col, k in c["output_preview"]["schema"]),
                    rows=tuple(tuple(row) for row in c["output_preview"]["rows"]),
                )
                if c.get("output_preview")
                else None
            ),
            full_row_count=int(c.get("full_row_count", 0)),
            raw_results=c.get("raw_results", ""),
            images=tuple(
                (img["name"], base64.b64decode(img["png_base64"]))
                for img in c.get("images", [])
            ),
            error_message=c.get("error_message"),
            output_ref=None,
            frame_hash=c.get("frame_hash"),
        )
        for c in doc["cells"]
    ]
    session.panels = [
        RecommendationPanel(
            panel_index=int(p["panel_index"]),
            per_advisor={
                aid: [(bid, float(prob)) for bid, prob in ranked]
                for aid, ranked in p["per_advisor"].items()
            },
            selected=p.get("selected"),
            selected_advisor=p.get("selected_advisor"),
        )
        for p in doc["panels"]
    ]
    session.cursor_history = [
        [AdvisorCursor(advisor_id=aid, state=state) for aid, state in cursors]
        for cursors in doc["cursor_history"]
    ]
    return session


def dump_snapshot(session: Session) -> bytes:
    return json.dumps(session_snapshot(session), indent=1, sort_keys=True).encode("utf-8")
