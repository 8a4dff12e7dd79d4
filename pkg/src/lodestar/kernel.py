"""Client side of the execution protocol, plus a deterministic mock.

The sidecar speaks newline-delimited JSON over stdin/stdout: requests are
``{"id", "op", "payload"}`` and each gets exactly one ``{"id", "status",
"payload"}`` response. Ops: hello, load_dataset, run_block,
export_frame_csv, shutdown. Block failures come back in-band as
``status: "error"`` results; transport failures (crash, timeout) surface
as error ExecutionResults with the handle restarted underneath, so a bad
kernel never corrupts session state.

The mock executor drives the exact same message layer in-process. It
stores frames parsed from CSV, applies every block as the identity
transform, and honors the same protocol postconditions (fresh output refs,
previews, content hashes), which keeps the primary test suite kernel-free.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import queue
import shlex
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass

from .catalog import AnalysisBlock
from .errors import BadCsv, KernelError, KernelUnavailable
from .tabular import DatasetHandle, infer_kinds, parse_csv, rows_to_csv_bytes

KERNEL_CMD_ENV = "LODESTAR_KERNEL_CMD"
EXEC_TIMEOUT_ENV = "LODESTAR_EXEC_TIMEOUT_S"

DEFAULT_EXEC_TIMEOUT_S = 30.0
HANDSHAKE_TIMEOUT_S = 10.0
DRY_RUN_TIMEOUT_S = 5.0
DRY_RUN_ROWS = 50

PREVIEW_MAX_ROWS = 50
PREVIEW_MAX_COLS = 30


@dataclass(frozen=True)
class TablePreview:
    schema: tuple[tuple[str, str], ...]
    rows: tuple[tuple, ...]


@dataclass(frozen=True)
class ExecutionResult:
    status: str  # "ok" | "error"
    table_preview: TablePreview | None = None
    full_row_count: int = 0
    stdout_text: str = ""
    images: tuple[tuple[str, bytes], ...] = ()
    error_message: str | None = None
    duration_ms: int = 0
    output_ref: str | None = None
    frame_hash: str | None = None
    input_frame_hash: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def frame_hash(header: list[str], rows: list[list]) -> str:
    return hashlib.sha256(rows_to_csv_bytes(header, rows)).hexdigest()


def _preview_from_payload(payload: dict) -> TablePreview | None:
    preview = payload.get("preview")
    if not preview:
        return None
    return TablePreview(
        schema=tuple((str(c), str(k)) for c, k in preview["schema"]),
        rows=tuple(tuple(row) for row in preview["rows"]),
    )


class BaseKernelHandle:
    """Protocol logic shared by the subprocess client and the mock."""

    def __init__(self) -> None:
        self._next_id = 0
        self._lock = threading.Lock()

    def _send(self, message: dict, timeout_s: float) -> dict:
        raise NotImplementedError

    def _request(self, op: str, payload: dict, timeout_s: float) -> tuple[str, dict]:
        with self._lock:  # at most one in-flight execution per kernel
            self._next_id += 1
            message = {"id": self._next_id, "op": op, "payload": payload}
            response = self._send(message, timeout_s)
        if response.get("id") != message["id"]:
            raise KernelError(
                f"response id {response.get('id')!r} does not match request {message['id']}"
            )
        return str(response.get("status")), response.get("payload") or {}

    def hello(self) -> dict:
        status, payload = self._request("hello", {}, HANDSHAKE_TIMEOUT_S)
        if status != "ok":
            raise KernelError(f"handshake failed: {payload.get('error')}")
        return payload

    def load_dataset(self, csv_bytes: bytes, dataset_id: str, name: str) -> DatasetHandle:
        """Store a CSV in the kernel; the reported schema must agree with
        the client's own scan of the same bytes."""
        local = parse_csv(csv_bytes)
        local_schema = infer_kinds(*local)
        status, payload = self._request(
            "load_dataset",
            {
                "dataset_id": dataset_id,
                "csv_base64": base64.b64encode(csv_bytes).decode("ascii"),
            },
            self.exec_timeout_s,
        )
        if status != "ok":
            raise BadCsv(str(payload.get("error", "kernel rejected the CSV")))
        reported_schema = [(str(c), str(k)) for c, k in payload["schema"]]
        if payload["row_count"] != len(local[1]) or reported_schema != local_schema:
            raise KernelError(
                f"kernel schema for {dataset_id!r} disagrees with the client CSV scan"
            )
        return DatasetHandle(
            dataset_id=dataset_id,
            name=name,
            schema=tuple(reported_schema),
            row_count=int(payload["row_count"]),
        )

    def dataset_ref(self, dataset_id: str) -> str:
        return f"d:{dataset_id}"

    @property
    def exec_timeout_s(self) -> float:
        return float(os.environ.get(EXEC_TIMEOUT_ENV, DEFAULT_EXEC_TIMEOUT_S))

    def execute_block(
        self,
        block: AnalysisBlock,
        input_ref: str,
        timeout_s: float | None = None,
        sample_rows: int | None = None,
    ) -> ExecutionResult:
        timeout_s = timeout_s if timeout_s is not None else self.exec_timeout_s
        artifact_dir = tempfile.mkdtemp(prefix="lodestar-artifacts-")
        started = time.monotonic()
        try:
            status, payload = self._request(
                "run_block",
                {
                    "block_id": block.block_id,
                    "code": block.code,
                    "input_ref": input_ref,
                    "artifact_dir": artifact_dir,
                    "timeout_s": timeout_s,
                    "sample_rows": sample_rows,
                },
                timeout_s,
            )
        except KernelError as exc:
            self._recover()
            return ExecutionResult(
                status="error",
                error_message=str(exc),
                duration_ms=int((time.monotonic() - started) * 1000),
            )
        finally:
            _cleanup_dir(artifact_dir)

        if status != "ok":
            return ExecutionResult(
                status="error",
                error_message=str(payload.get("error", "block execution failed")),
                duration_ms=int(payload.get("duration_ms", 0)),
            )
        images = tuple(
            (str(img["name"]), base64.b64decode(img["png_base64"]))
            for img in payload.get("images", [])
        )
        return ExecutionResult(
            status="ok",
            table_preview=_preview_from_payload(payload),
            full_row_count=int(payload["full_row_count"]),
            stdout_text=str(payload.get("stdout", "")),
            images=images,
            duration_ms=int(payload.get("duration_ms", 0)),
            output_ref=str(payload["output_ref"]),
            frame_hash=payload.get("frame_hash"),
            input_frame_hash=payload.get("input_frame_hash"),
        )

    def dry_run(self, block: AnalysisBlock, input_ref: str) -> bool:
        """Execute on a small sample; used to hide recommendations that fail."""
        result = self.execute_block(
            block, input_ref, timeout_s=DRY_RUN_TIMEOUT_S, sample_rows=DRY_RUN_ROWS
        )
        return result.ok

    def export_frame_csv(self, ref: str) -> bytes:
        status, payload = self._request("export_frame_csv", {"ref": ref}, self.exec_timeout_s)
        if status != "ok":
            raise KernelError(str(payload.get("error", f"no frame for ref {ref!r}")))
        return base64.b64decode(payload["csv_base64"])

    def shutdown(self) -> None:
        try:
            self._request("shutdown", {}, 5.0)
        except KernelError:
            pass

    def _recover(self) -> None:
        """Restore a usable transport after a crash or timeout."""


def _cleanup_dir(path: str) -> None:
    try:
        for entry in os.listdir(path):
            os.unlink(os.path.join(path, entry))
        os.rmdir(path)
    except OSError:
        pass


class KernelProcessHandle(BaseKernelHandle):
    """Runs the sidecar as a subprocess and frames NDJSON over its pipes."""

    def __init__(self, cmd: str, session_id: str):
        super().__init__()
        self.cmd = cmd
        self.session_id = session_id
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue = queue.Queue()
        self._start()

    def _start(self) -> None:
        try:
            self._proc = subprocess.Popen(
                shlex.split(self.cmd),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
            )
        except OSError as exc:
            raise KernelUnavailable(f"cannot start kernel {self.cmd!r}: {exc}") from exc
        self._lines = queue.Queue()
        thread = threading.Thread(target=self._read_loop, args=(self._proc,), daemon=True)
        thread.start()
        try:
            self.hello()
        except KernelError as exc:
            self._kill()
            raise KernelUnavailable(f"kernel handshake failed: {exc}") from exc

    def _read_loop(self, proc: subprocess.Popen) -> None:
        assert proc.stdout is not None
        for line in proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def _send(self, message: dict, timeout_s: float) -> dict:
        proc = self._proc
        if proc is None or proc.poll() is not None:
            raise KernelError("kernel process is not running")
        assert proc.stdin is not None
        try:
            proc.stdin.write(json.dumps(message) + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise KernelError(f"kernel pipe closed: {exc}") from exc
        deadline = time.monotonic() + timeout_s
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self._kill()
                raise KernelError(f"kernel timed out after {timeout_s}s")
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                self._kill()
                raise KernelError(f"kernel timed out after {timeout_s}s") from None
            if line is None:
                raise KernelError("kernel exited unexpectedly")
            try:
                response = json.loads(line)
            except json.JSONDecodeError:
                continue  # stray output on stdout; keep waiting for the reply
            if response.get("id") == message["id"]:
                return response

    def _kill(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.kill()
            self._proc.wait()
        self._proc = None

    def _recover(self) -> None:
        self._kill()
        try:
            self._start()
        except KernelUnavailable:
            pass  # next request will report the dead kernel

    @property
    def alive(self) -> bool:
        return self._proc is not None and self._proc.poll() is None

    def close(self) -> None:
        if self.alive:
            self.shutdown()
        self._kill()


class MockKernelServer:
    """In-process stand-in for the sidecar; same messages, no code execution.

    Blocks apply as the identity transform. ``fail_block_ids`` lets tests
    exercise the error path deterministically.
    """

    def __init__(self, fail_block_ids: set[str] | None = None):
        self.frames: dict[str, tuple[list[str], list[list[str]]]] = {}
        self.fail_block_ids = fail_block_ids or set()
        self._counter = 0

    def handle(self, message: dict) -> dict:
        msg_id = message.get("id")
        op = message.get("op")
        payload = message.get("payload") or {}
        handler = getattr(self, f"_op_{op}", None)
        if handler is None:
            return {"id": msg_id, "status": "error", "payload": {"error": f"unknown op {op!r}"}}
        try:
            return {"id": msg_id, "status": "ok", "payload": handler(payload)}
        except _MockFailure as exc:
            return {"id": msg_id, "status": "error", "payload": {"error": str(exc)}}

    def _op_hello(self, payload: dict) -> dict:
        return {"language": "python", "executor": "mock"}

    def _op_load_dataset(self, payload: dict) -> dict:
        raw = base64.b64decode(payload["csv_base64"])
        try:
            header, rows = parse_csv(raw)
        except BadCsv as exc:
            raise _MockFailure(str(exc)) from exc
        ref = f"d:{payload['dataset_id']}"
        self.frames[ref] = (header, rows)
        return {
            "ref": ref,
            "schema": [[c, k] for c, k in infer_kinds(header, rows)],
            "row_count": len(rows),
        }

    def _op_run_block(self, payload: dict) -> dict:
        input_ref = payload.get("input_ref")
        if input_ref not in self.frames:
            raise _MockFailure(f"unknown input ref {input_ref!r}")
        if payload.get("block_id") in self.fail_block_ids:
            raise _MockFailure(f"block {payload['block_id']!r} raised (mock failure)")
        header, in_rows = self.frames[input_ref]
        work_rows = in_rows
        if payload.get("sample_rows"):
            work_rows = in_rows[: int(payload["sample_rows"])]
        self._counter += 1
        output_ref = f"f:{self._counter}"
        out_rows = [list(row) for row in work_rows]
        self.frames[output_ref] = (list(header), out_rows)
        schema = infer_kinds(header, out_rows)
        preview_cols = min(len(header), PREVIEW_MAX_COLS)
        return {
            "output_ref": output_ref,
            "preview": {
                "schema": [[c, k] for c, k in schema[:preview_cols]],
                "rows": [row[:preview_cols] for row in out_rows[:PREVIEW_MAX_ROWS]],
            },
            "full_row_count": len(out_rows),
            "stdout": "",
            "images": [],
            "duration_ms": 0,
            "frame_hash": frame_hash(list(header), out_rows),
            "input_frame_hash": frame_hash(list(header), in_rows),
        }

    def _op_export_frame_csv(self, payload: dict) -> dict:
        ref = payload.get("ref")
        if ref not in self.frames:
            raise _MockFailure(f"unknown ref {ref!r}")
        header, rows = self.frames[ref]
        return {"csv_base64": base64.b64encode(rows_to_csv_bytes(header, rows)).decode("ascii")}

    def _op_shutdown(self, payload: dict) -> dict:
        return {}


class _MockFailure(Exception):
    pass


class MockKernelHandle(BaseKernelHandle):
    """Drives a MockKernelServer through the message layer, round-tripping
    every message through JSON so only wire-legal payloads pass."""

    def __init__(self, server: MockKernelServer | None = None):
        super().__init__()
        self.server = server or MockKernelServer()

    def _send(self, message: dict, timeout_s: float) -> dict:
        wire = json.loads(json.dumps(message))
        return json.loads(json.dumps(self.server.handle(wire)))

    @property
    def alive(self) -> bool:
        return True

    def close(self) -> None:
        pass


class KernelManager:
    """One kernel handle per session; starting twice returns the same one.

    Without a configured kernel command the manager degrades to mock
    executors, leaving sessions in recommendation-only mode.
    """

    def __init__(self, cmd: str | None = None, allow_mock_fallback: bool = True):
        self.cmd = cmd if cmd is not None else os.environ.get(KERNEL_CMD_ENV)
        self.allow_mock_fallback = allow_mock_fallback
        self._handles: dict[str, BaseKernelHandle] = {}
        self._lock = threading.Lock()

    def start(self, session_id: str) -> BaseKernelHandle:
        with self._lock:
            if session_id in self._handles:
                return self._handles[session_id]
            if self.cmd:
                try:
                    handle: BaseKernelHandle = KernelProcessHandle(self.cmd, session_id)
                except KernelUnavailable:
                    if not self.allow_mock_fallback:
                        raise
                    handle = MockKernelHandle()
            elif self.allow_mock_fallback:
                handle = MockKernelHandle()
            else:
                raise KernelUnavailable("no kernel command configured")
            self._handles[session_id] = handle
            return handle

    def stop(self, session_id: str) -> None:
        with self._lock:
            handle = self._handles.pop(session_id, None)
        if handle is not None:
            handle.close()

    def close(self) -> None:
        with self._lock:
            handles = list(self._handles.values())
            self._handles.clear()
        for handle in handles:
            handle.close()


_default_manager: KernelManager | None = None
_default_manager_lock = threading.Lock()


def start_kernel(session_id: str, cmd: str | None = None) -> BaseKernelHandle:
    """Start (or reuse) the kernel for one session via a shared manager.

    A second start for the same session returns the same handle. Raises
    KernelUnavailable when no kernel command is configured; callers may
    degrade to MockKernelHandle for recommendation-only sessions.
    """
    global _default_manager
    with _default_manager_lock:
        if _default_manager is None or (cmd is not None and _default_manager.cmd != cmd):
            _default_manager = KernelManager(cmd=cmd, allow_mock_fallback=False)
        manager = _default_manager
    return manager.start(session_id)
