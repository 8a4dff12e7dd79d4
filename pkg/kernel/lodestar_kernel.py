#!/usr/bin/env python3
"""Execution sidecar: runs analysis blocks on live pandas data frames.

Speaks newline-delimited JSON over stdin/stdout. Requests are
``{"id", "op", "payload"}`` and every request gets exactly one
``{"id", "status", "payload"}`` response, in request order. Ops:

* ``hello``            -> interpreter info
* ``load_dataset``     -> store a CSV as a frame under ``d:<dataset_id>``
* ``run_block``        -> execute a block's ``analyze`` function on a stored
                          frame; the result is stored under a fresh ref
* ``export_frame_csv`` -> a stored frame as CSV bytes (base64)
* ``shutdown``         -> acknowledge and exit 0

Frames are never overwritten; every block output gets a fresh ref. A block
exception is answered in-band (``status: "error"`` with the traceback) and
leaves the store untouched. Block code runs in a fresh namespace with
``ARTIFACT_DIR`` pointing at the request's artifact directory; any PNG the
block writes there is returned base64-encoded. Block ``print`` output is
captured, never written to the protocol stream.

This process deliberately shares no code with the service that launches
it; the protocol is the whole contract.
"""

from __future__ import annotations

import base64
import contextlib
import csv
import hashlib
import io
import json
import os
import sys
import time
import traceback

os.environ.setdefault("MPLBACKEND", "Agg")

import pandas as pd

PREVIEW_MAX_ROWS = 50
PREVIEW_MAX_COLS = 30


class FrameStore:
    """Named, immutable frame storage; refs are handed out once."""

    def __init__(self) -> None:
        self._frames: dict[str, pd.DataFrame] = {}
        self._counter = 0

    def put_dataset(self, dataset_id: str, frame: pd.DataFrame) -> str:
        ref = f"d:{dataset_id}"
        self._frames[ref] = frame
        return ref

    def put_output(self, frame: pd.DataFrame) -> str:
        self._counter += 1
        ref = f"f:{self._counter}"
        self._frames[ref] = frame
        return ref

    def get(self, ref: str) -> pd.DataFrame:
        if ref not in self._frames:
            raise KeyError(f"unknown ref {ref!r}")
        return self._frames[ref]


def _scalar(value):
    """A JSON-safe Python scalar for one frame value."""
    if value is None or (isinstance(value, float) and value != value):
        return None
    try:
        if pd.isna(value):
            return None
    except (TypeError, ValueError):
        pass
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, (int, float, bool, str)):
        return value
    return str(value)


def _column_kind(series: pd.Series, row_count: int) -> str:
    """Mirror of the client-side CSV scan: numeric when every non-empty
    value is a decimal number, categorical when distinct values stay within
    max(20, 5% of rows), other otherwise."""
    if pd.api.types.is_bool_dtype(series):
        return "categorical" if series.nunique() <= max(20, 0.05 * row_count) else "other"
    if pd.api.types.is_numeric_dtype(series):
        return "numeric"
    values = series.dropna().astype(str)
    values = values[values != ""]
    if len(values) == 0:
        return "numeric"

    def _is_number(text: str) -> bool:
        try:
            float(text)
        except ValueError:
            return False
        return True

    if values.map(_is_number).all():
        return "numeric"
    if values.nunique() <= max(20, 0.05 * row_count):
        return "categorical"
    return "other"


def _schema(frame: pd.DataFrame) -> list[list[str]]:
    return [[str(col), _column_kind(frame[col], len(frame))] for col in frame.columns]


def _csv_bytes(frame: pd.DataFrame) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow([str(c) for c in frame.columns])
    for row in frame.itertuples(index=False, name=None):
        writer.writerow(["" if _scalar(v) is None else _scalar(v) for v in row])
    return out.getvalue().encode("utf-8")


def _frame_hash(frame: pd.DataFrame) -> str:
    return hashlib.sha256(_csv_bytes(frame)).hexdigest()


def _preview(frame: pd.DataFrame) -> dict:
    schema = _schema(frame)[:PREVIEW_MAX_COLS]
    columns = [name for name, _ in schema]
    rows = [
        [_scalar(v) for v in row]
        for row in frame[columns].head(PREVIEW_MAX_ROWS).itertuples(index=False, name=None)
    ]
    return {"schema": schema, "rows": rows}


class KernelServer:
    def __init__(self) -> None:
        self.store = FrameStore()

    # -- op handlers -----------------------------------------------------

    def op_hello(self, payload: dict) -> dict:
        return {
            "language": "python",
            "executor": "pandas-kernel",
            "python_version": sys.version.split()[0],
            "pandas_version": pd.__version__,
        }

    def op_load_dataset(self, payload: dict) -> dict:
        raw = base64.b64decode(payload["csv_base64"])
        try:
            frame = pd.read_csv(io.BytesIO(raw))
        except Exception as exc:  # pandas raises many parse error types
            raise BlockFailure(f"cannot parse CSV: {exc}") from exc
        ref = self.store.put_dataset(str(payload["dataset_id"]), frame)
        return {"ref": ref, "schema": _schema(frame), "row_count": int(len(frame))}

    def op_run_block(self, payload: dict) -> dict:
        try:
            input_frame = self.store.get(str(payload["input_ref"]))
        except KeyError as exc:
            raise BlockFailure(str(exc)) from exc
        work = input_frame
        if payload.get("sample_rows"):
            work = input_frame.head(int(payload["sample_rows"]))

        artifact_dir = payload.get("artifact_dir") or None
        namespace = {"ARTIFACT_DIR": artifact_dir or os.getcwd()}
        captured = io.StringIO()
        started = time.monotonic()
        try:
            with contextlib.redirect_stdout(captured):
                exec(
                    compile(payload["code"], f"<block:{payload.get('block_id')}>", "exec"),
                    namespace,
                )
                analyze = namespace.get("analyze")
                if not callable(analyze):
                    raise TypeError("block code must define an analyze(df) function")
                result = analyze(work.copy())
        except BaseException:
            raise BlockFailure(traceback.format_exc()) from None
        if not isinstance(result, pd.DataFrame):
            raise BlockFailure(
                f"analyze returned {type(result).__name__}, expected a data frame"
            )

        duration_ms = int((time.monotonic() - started) * 1000)
        output_ref = self.store.put_output(result)
        images = []
        if artifact_dir and os.path.isdir(artifact_dir):
            for name in sorted(os.listdir(artifact_dir)):
                if name.lower().endswith(".png"):
                    with open(os.path.join(artifact_dir, name), "rb") as fh:
                        images.append(
                            {
                                "name": name,
                                "png_base64": base64.b64encode(fh.read()).decode("ascii"),
                            }
                        )
        return {
            "output_ref": output_ref,
            "preview": _preview(result),
            "full_row_count": int(len(result)),
            "stdout": captured.getvalue(),
            "images": images,
            "duration_ms": duration_ms,
            "frame_hash": _frame_hash(result),
            "input_frame_hash": _frame_hash(input_frame),
        }

    def op_export_frame_csv(self, payload: dict) -> dict:
        try:
            frame = self.store.get(str(payload["ref"]))
        except KeyError as exc:
            raise BlockFailure(str(exc)) from exc
        return {"csv_base64": base64.b64encode(_csv_bytes(frame)).decode("ascii")}

    def op_shutdown(self, payload: dict) -> dict:
        return {}

    # -- request loop ------------------------------------------------------

    def handle(self, message: dict) -> dict:
        msg_id = message.get("id")
        op = str(message.get("op"))
        handler = getattr(self, f"op_{op}", None)
        if handler is None:
            return _error(msg_id, f"unknown op {op!r}")
        try:
            return {"id": msg_id, "status": "ok", "payload": handler(message.get("payload") or {})}
        except BlockFailure as exc:
            return _error(msg_id, str(exc))
        except Exception:
            return _error(msg_id, traceback.format_exc())

    def serve(self, stdin, stdout) -> int:
        for line in stdin:
            line = line.strip()
            if not line:
                continue
            try:
                message = json.loads(line)
            except json.JSONDecodeError as exc:
                _write(stdout, _error(None, f"malformed request: {exc.msg}"))
                continue
            if not isinstance(message, dict):
                _write(stdout, _error(None, "request must be a JSON object"))
                continue
            response = self.handle(message)
            _write(stdout, response)
            if message.get("op") == "shutdown":
                return 0
        return 0


class BlockFailure(Exception):
    """An in-band error: reported to the client, never crashes the loop."""


def _error(msg_id, text: str) -> dict:
    return {"id": msg_id, "status": "error", "payload": {"error": text}}


def _write(stdout, response: dict) -> None:
    stdout.write(json.dumps(response) + "\n")
    stdout.flush()


def main() -> int:
    return KernelServer().serve(sys.stdin, sys.stdout)


if __name__ == "__main__":
    sys.exit(main())
