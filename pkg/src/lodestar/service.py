"""HTTP surface: sessions, catalog, datasets, recommendations, exports.

The service owns shared immutable advisor graphs and the block catalog,
plus per-session mutable state guarded by one lock per session. Sessions
are snapshotted to disk as JSON after every mutation (kernel frames are
not included; a restored session must be explicitly replayed before it can
execute further steps).
"""

from __future__ import annotations

import json
import logging
import re
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .advisor import CATALOG_ADVISOR, RecommendationPanel
from .catalog import Catalog, check_graph_integrity
from .errors import (
    BadCsv,
    CellErrored,
    EmptySession,
    KernelError,
    KernelUnavailable,
    LodestarError,
    StalePanel,
    StaleSession,
    UnknownBlock,
    UnknownState,
)
from .graph import RecommendationGraph
from .kernel import BaseKernelHandle, KernelManager
from .session import (
    NotebookCell,
    Session,
    dump_snapshot,
    session_from_snapshot,
)
from .tabular import inspect_csv

logger = logging.getLogger(__name__)

PORT_ENV = "LODESTAR_PORT"
DATA_DIR_ENV = "LODESTAR_DATA_DIR"


class StepRequest(BaseModel):
    panel_index: int
    advisor_id: str
    block_id: str


class CreateSessionRequest(BaseModel):
    dataset_id: str


@dataclass
class ServiceState:
    catalog: Catalog
    graphs: dict[str, RecommendationGraph]
    kernels: KernelManager
    data_dir: Path | None = None
    datasets: dict[str, tuple[str, bytes]] = field(default_factory=dict)
    sessions: dict[str, Session] = field(default_factory=dict)
    executors: dict[str, BaseKernelHandle] = field(default_factory=dict)
    locks: dict[str, threading.Lock] = field(default_factory=dict)
    registry_lock: threading.Lock = field(default_factory=threading.Lock)

    def lock_for(self, session_id: str) -> threading.Lock:
        with self.registry_lock:
            return self.locks.setdefault(session_id, threading.Lock())

    def snapshot(self, session: Session) -> None:
        if self.data_dir is None:
            return
        sessions_dir = self.data_dir / "sessions"
        sessions_dir.mkdir(parents=True, exist_ok=True)
        (sessions_dir / f"{session.session_id}.json").write_bytes(dump_snapshot(session))

    def restore_sessions(self) -> None:
        if self.data_dir is None:
            return
        sessions_dir = self.data_dir / "sessions"
        if not sessions_dir.is_dir():
            return
        for path in sorted(sessions_dir.glob("*.json")):
            try:
                doc = json.loads(path.read_text(encoding="utf-8"))
                session = session_from_snapshot(doc, self.graphs, self.catalog)
            except (ValueError, KeyError) as exc:
                logger.warning("ignoring bad session snapshot %s: %s", path, exc)
                continue
            self.sessions[session.session_id] = session


# -- view builders --------------------------------------------------------


def _cell_view(cell: NotebookCell) -> dict:
    preview = cell.output_preview
    return {
        "cell_index": cell.cell_index,
        "block_id": cell.block_id,
        "name": cell.name,
        "execution_status": cell.execution_status,
        "error_message": cell.error_message,
        "tabs": {
            "output_data_frame": {
                "schema": [[c, k] for c, k in preview.schema] if preview else [],
                "rows": [list(row) for row in preview.rows] if preview else [],
                "full_row_count": cell.full_row_count,
                "truncated": bool(preview and len(preview.rows) < cell.full_row_count),
            },
            "analysis_results": {
                "stdout": cell.raw_results,
                "images": [name for name, _ in cell.images],
            },
            "script": cell.script,
            "whats_this_analysis": cell.description,
            "analysis_progress": list(cell.progress),
        },
    }


def _panel_view(panel: RecommendationPanel, catalog: Catalog) -> dict:
    advisors = {}
    for advisor_id, ranked in sorted(panel.per_advisor.items()):
        entries = []
        for block_id, probability in ranked:
            block = catalog.get(block_id)
            entries.append(
                {
                    "block_id": block_id,
                    "name": block.name,
                    "description": block.description,
                    "tags": sorted(block.tags),
                    "probability": probability,
                }
            )
        advisors[advisor_id] = entries
    return {
        "panel_index": panel.panel_index,
        "advisors": advisors,
        "selected": panel.selected,
        "selected_advisor": panel.selected_advisor,
    }


def _session_view(session: Session, catalog: Catalog) -> dict:
    return {
        "session_id": session.session_id,
        "created_at": session.created_at,
        "updated_at": session.updated_at,
        "live": session.live,
        "dataset": {
            "dataset_id": session.dataset.dataset_id,
            "name": session.dataset.name,
            "schema": [[c, k] for c, k in session.dataset.schema],
            "row_count": session.dataset.row_count,
        },
        "cells": [_cell_view(cell) for cell in session.cells],
        "panels": [_panel_view(panel, catalog) for panel in session.panels],
        "cursors": [[c.advisor_id, c.state] for c in session.cursors],
    }


def _block_view(block) -> dict:
    return {
        "id": block.block_id,
        "name": block.name,
        "description": block.description,
        "tags": sorted(block.tags),
        "origin": block.advisor_origin,
        "requirements": {
            "min_numeric_columns": block.requirements.min_numeric_columns,
            "min_categorical_columns": block.requirements.min_categorical_columns,
            "min_rows": block.requirements.min_rows,
        },
        "code": block.code,
    }


_ERROR_STATUS = {
    BadCsv: (400, "bad-csv"),
    UnknownBlock: (404, "unknown-block"),
    UnknownState: (404, "unknown-state"),
    StalePanel: (409, "stale-panel"),
    StaleSession: (409, "stale-session"),
    CellErrored: (409, "cell-errored"),
    EmptySession: (409, "empty-session"),
    KernelUnavailable: (502, "kernel-unavailable"),
    KernelError: (502, "kernel-error"),
}


def _error_response(exc: LodestarError) -> JSONResponse:
    status, code = _ERROR_STATUS.get(type(exc), (400, "validation"))
    return JSONResponse(
        status_code=status,
        content={"error": {"code": code, "message": str(exc), "http_status": status}},
    )


def _slug(name: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    return slug or "dataset"


def create_app(
    catalog: Catalog,
    graphs: dict[str, RecommendationGraph],
    kernels: KernelManager | None = None,
    data_dir: str | Path | None = None,
    datasets: dict[str, tuple[str, bytes]] | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Assemble the application around validated graphs and catalog."""
    for advisor_id, graph in graphs.items():
        missing = check_graph_integrity(graph, catalog)
        if missing:
            raise UnknownBlock(
                f"advisor {advisor_id!r} references blocks missing from the catalog: "
                + ", ".join(missing)
            )

    state = ServiceState(
        catalog=catalog,
        graphs=graphs,
        kernels=kernels or KernelManager(),
        data_dir=Path(data_dir) if data_dir else None,
    )
    if datasets:
        state.datasets.update(datasets)
    if state.data_dir is not None:
        datasets_dir = state.data_dir / "datasets"
        if datasets_dir.is_dir():
            for path in sorted(datasets_dir.glob("*.csv")):
                state.datasets.setdefault(path.stem, (path.stem, path.read_bytes()))
    state.restore_sessions()

    app = FastAPI(title="lodestar", version="0.1.0")
    app.state.lodestar = state

    @app.exception_handler(LodestarError)
    async def _lodestar_error(request: Request, exc: LodestarError):
        return _error_response(exc)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "validation", "message": str(exc), "http_status": 400}},
        )

    @app.exception_handler(RequestValidationError)
    async def _request_validation(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "validation", "message": str(exc), "http_status": 400}},
        )

    def _get_session(session_id: str) -> Session:
        session = state.sessions.get(session_id)
        if session is None:
            raise UnknownBlock(f"no session {session_id!r}")
        return session

    def _get_cell(session: Session, cell_index: int) -> NotebookCell:
        if not 0 <= cell_index < len(session.cells):
            raise UnknownBlock(f"no cell {cell_index} in session {session.session_id!r}")
        return session.cells[cell_index]

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/catalog")
    def get_catalog() -> dict:
        return {"blocks": [_block_view(block) for block in state.catalog]}

    @app.get("/datasets")
    def list_datasets() -> dict:
        out = []
        for dataset_id, (name, raw) in sorted(state.datasets.items()):
            handle = inspect_csv(raw, dataset_id, name)
            out.append(
                {
                    "dataset_id": handle.dataset_id,
                    "name": handle.name,
                    "schema": [[c, k] for c, k in handle.schema],
                    "row_count": handle.row_count,
                }
            )
        return {"datasets": out}

    @app.post("/datasets", status_code=201)
    async def upload_dataset(request: Request, name: str = "dataset") -> dict:
        raw = await request.body()
        handle = inspect_csv(raw, _slug(name), name)  # validates the CSV
        dataset_id = _slug(name)
        suffix = 1
        while dataset_id in state.datasets:
            suffix += 1
            dataset_id = f"{_slug(name)}-{suffix}"
        state.datasets[dataset_id] = (name, raw)
        if state.data_dir is not None:
            datasets_dir = state.data_dir / "datasets"
            datasets_dir.mkdir(parents=True, exist_ok=True)
            (datasets_dir / f"{dataset_id}.csv").write_bytes(raw)
        return {
            "dataset_id": dataset_id,
            "name": handle.name,
            "schema": [[c, k] for c, k in handle.schema],
            "row_count": handle.row_count,
        }

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionRequest) -> dict:
        if body.dataset_id not in state.datasets:
            raise UnknownBlock(f"no dataset {body.dataset_id!r}")
        name, raw = state.datasets[body.dataset_id]
        session_id = uuid.uuid4().hex[:12]
        executor = state.kernels.start(session_id)
        handle = executor.load_dataset(raw, body.dataset_id, name)
        session = Session(
            session_id=session_id,
            dataset=handle,
            graphs=state.graphs,
            catalog=state.catalog,
        )
        with state.registry_lock:
            state.sessions[session_id] = session
            state.executors[session_id] = executor
        state.snapshot(session)
        return _session_view(session, state.catalog)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return _session_view(_get_session(session_id), state.catalog)

    def _executor_for(session: Session) -> BaseKernelHandle:
        executor = state.executors.get(session.session_id)
        if executor is None:
            raise StaleSession(
                f"session {session.session_id!r} has no live kernel; replay it first"
            )
        return executor

    @app.post("/sessions/{session_id}/steps")
    def post_step(session_id: str, body: StepRequest) -> dict:
        session = _get_session(session_id)
        with state.lock_for(session_id):
            if not session.live:
                raise StaleSession(
                    f"session {session_id!r} was restored from disk; replay it first"
                )
            if body.panel_index > len(session.cells) or (
                body.panel_index == len(session.cells) and not session.has_trailing_panel
            ):
                raise StalePanel(
                    f"panel {body.panel_index} is stale; the notebook has "
                    f"{len(session.cells)} cell(s)"
                )
            block = state.catalog.get(body.block_id)
            if body.advisor_id != CATALOG_ADVISOR:
                if body.advisor_id not in state.graphs:
                    raise UnknownBlock(f"no advisor {body.advisor_id!r}")
                panel = session.panels[body.panel_index]
                listed = [bid for bid, _ in panel.per_advisor.get(body.advisor_id, [])]
                if body.block_id not in listed:
                    raise ValueError(
                        f"block {body.block_id!r} is not recommended by "
                        f"{body.advisor_id!r} in panel {body.panel_index}"
                    )
            executor = _executor_for(session)
            input_ref = session.input_ref_for_panel(
                body.panel_index, executor.dataset_ref(session.dataset.dataset_id)
            )
            execution = executor.execute_block(block, input_ref)
            if body.panel_index == len(session.cells):
                cell = session.append_cell(body.advisor_id, block, execution)
            else:
                cell = session.replace_cell(
                    body.panel_index, body.advisor_id, block, execution
                )
            state.snapshot(session)
            return {
                "cell": _cell_view(cell),
                "session": _session_view(session, state.catalog),
            }

    @app.delete("/sessions/{session_id}/cells/{cell_index}")
    def delete_cell(session_id: str, cell_index: int) -> dict:
        session = _get_session(session_id)
        with state.lock_for(session_id):
            _get_cell(session, cell_index)
            session.delete_cell(cell_index)
            state.snapshot(session)
            return _session_view(session, state.catalog)

    @app.post("/sessions/{session_id}/replay")
    def replay_session(session_id: str) -> dict:
        """Re-execute a restored session's chain to rebuild kernel frames."""
        session = _get_session(session_id)
        with state.lock_for(session_id):
            executor = state.executors.get(session.session_id)
            if executor is None:
                executor = state.kernels.start(session.session_id)
                with state.registry_lock:
                    state.executors[session.session_id] = executor
            name, raw = state.datasets.get(
                session.dataset.dataset_id, (session.dataset.name, None)
            )
            if raw is None:
                raise StaleSession(
                    f"dataset {session.dataset.dataset_id!r} is no longer available"
                )
            executor.load_dataset(raw, session.dataset.dataset_id, name)
            input_ref = executor.dataset_ref(session.dataset.dataset_id)
            for cell in session.cells:
                block = state.catalog.get(cell.block_id)
                execution = executor.execute_block(block, input_ref)
                if not execution.ok:
                    raise KernelError(
                        f"replay failed at cell {cell.cell_index}: {execution.error_message}"
                    )
                cell.output_preview = execution.table_preview
                cell.full_row_count = execution.full_row_count
                cell.raw_results = execution.stdout_text
                cell.images = execution.images
                cell.output_ref = execution.output_ref
                cell.frame_hash = execution.frame_hash
                input_ref = execution.output_ref
            session.live = True
            state.snapshot(session)
            return _session_view(session, state.catalog)

    @app.get("/sessions/{session_id}/export.ipynb")
    def export_notebook(session_id: str) -> Response:
        session = _get_session(session_id)
        return Response(
            content=session.export_notebook(),
            media_type="application/x-ipynb+json",
            headers={
                "Content-Disposition": f'attachment; filename="{session.export_filename()}"'
            },
        )

    @app.get("/sessions/{session_id}/cells/{cell_index}/export.ipynb")
    def export_cell_notebook(session_id: str, cell_index: int) -> Response:
        session = _get_session(session_id)
        _get_cell(session, cell_index)
        return Response(
            content=session.export_cell_notebook(cell_index),
            media_type="application/x-ipynb+json",
            headers={
                "Content-Disposition": (
                    f'attachment; filename="step_{cell_index}.ipynb"'
                )
            },
        )

    @app.get("/sessions/{session_id}/cells/{cell_index}/export.csv")
    def export_cell_csv(session_id: str, cell_index: int) -> Response:
        session = _get_session(session_id)
        cell = _get_cell(session, cell_index)
        if not cell.ok or cell.output_ref is None:
            raise CellErrored(f"cell {cell_index} has no output frame")
        executor = _executor_for(session)
        return Response(
            content=session.export_csv(cell_index, executor),
            media_type="text/csv",
            headers={
                "Content-Disposition": f'attachment; filename="cell_{cell_index}.csv"'
            },
        )

    @app.get("/sessions/{session_id}/cells/{cell_index}/images/{image_name}")
    def cell_image(session_id: str, cell_index: int, image_name: str) -> Response:
        session = _get_session(session_id)
        cell = _get_cell(session, cell_index)
        for name, data in cell.images:
            if name == image_name:
                return Response(content=data, media_type="image/png")
        raise UnknownBlock(f"cell {cell_index} has no image {image_name!r}")

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

        @app.get("/")
        def index() -> RedirectResponse:
            return RedirectResponse(url="/ui/")

    else:

        @app.get("/")
        def index() -> dict:
            return {
                "service": "lodestar",
                "endpoints": [
                    "/health",
                    "/catalog",
                    "/datasets",
                    "/sessions",
                ],
            }

    return app
