"""Annotation session backend.

Sessions hold an ordered item list for one task (adequacy judgements
or dataset-error labelling) and collect one label per item.  Every
mutation is appended to a per-session JSONL journal and fsynced before
the call returns, so state is exactly the journal fold: killing the
process and replaying the journal reconstructs the same session,
including label order and timestamps.  Labels are append-only; fixing
a mistake requires an explicit overwrite, and the journal keeps both
events.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import ParaqaError, UnknownUid

__all__ = [
    "TASK_LABELS",
    "Item",
    "LabelRecord",
    "Session",
    "SessionStore",
    "EmptyItems",
    "UnknownSession",
    "UnknownItem",
    "InvalidLabel",
    "AlreadyLabeled",
    "create_app",
]

TASK_LABELS = {
    "adequacy": ("Adequate", "Inadequate", "Trivial"),
    "dataset_error": ("NoError", "Question", "Paraphrase", "Both"),
}


class EmptyItems(ParaqaError):
    """A session needs at least one item."""


class UnknownSession(ParaqaError):
    """No session with that id."""


class UnknownItem(ParaqaError):
    """No item with that id in the session."""


class InvalidLabel(ParaqaError):
    """The label is not in the task's label set."""


class AlreadyLabeled(ParaqaError):
    """The item already has a label and overwrite was not requested."""


@dataclass(frozen=True)
class Item:
    """One unit of annotation work.  payload carries the texts to
    display (candidate/source for adequacy, question/paraphrase for
    dataset_error) and is shown verbatim."""

    item_id: str
    uid: str
    payload: dict

    def to_dict(self) -> dict:
        return {"item_id": self.item_id, "uid": self.uid, **self.payload}


@dataclass(frozen=True)
class LabelRecord:
    session_id: str
    item_id: str
    uid: str
    label: str
    annotator: str
    timestamp: str
    system: str = ""

    def to_dict(self) -> dict:
        out = {
            "session_id": self.session_id,
            "item_id": self.item_id,
            "uid": self.uid,
            "label": self.label,
            "annotator": self.annotator,
            "timestamp": self.timestamp,
        }
        if self.system:
            out["system"] = self.system
        return out


@dataclass
class Session:
    session_id: str
    task: str
    items: list[Item]
    labels: dict[str, LabelRecord] = field(default_factory=dict)
    created_at: str = ""

    def next_item(self) -> Item | None:
        for item in self.items:
            if item.item_id not in self.labels:
                return item
        return None

    def export(self) -> list[LabelRecord]:
        """Labelled items in item order, final label per item."""
        return [self.labels[i.item_id] for i in self.items if i.item_id in self.labels]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _validate_items(raw_items: list, known_uids: set[str] | None) -> list[Item]:
    if not raw_items:
        raise EmptyItems("items must be a non-empty list")
    items: list[Item] = []
    seen_ids: set[str] = set()
    for i, raw in enumerate(raw_items):
        if not isinstance(raw, dict) or "uid" not in raw:
            raise EmptyItems(f"item {i} must be an object with a uid")
        uid = str(raw["uid"])
        if known_uids is not None and uid not in known_uids:
            raise UnknownUid(uid)
        item_id = str(raw.get("item_id") or f"{i:04d}:{uid}")
        if item_id in seen_ids:
            raise EmptyItems(f"duplicate item_id {item_id!r}")
        seen_ids.add(item_id)
        payload = {
            str(k): str(v)
            for k, v in raw.items()
            if k not in ("item_id", "uid") and v is not None
        }
        items.append(Item(item_id=item_id, uid=uid, payload=payload))
    return items


class SessionStore:
    """Journal-backed session collection.

    One JSONL file per session under data_dir.  Events are "create"
    and "label"; replay folds them back into Session objects.  Appends
    are flushed and fsynced before the mutation is acknowledged.  A
    torn final line (the mark of a crash mid-append) is ignored on
    replay; corruption anywhere else raises.
    """

    def __init__(self, data_dir: str | Path, known_uids: set[str] | None = None) -> None:
        self._dir = Path(data_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._known_uids = known_uids
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        for path in sorted(self._dir.glob("*.jsonl")):
            session = self._replay(path)
            if session is not None:
                self._sessions[session.session_id] = session

    def _journal_path(self, session_id: str) -> Path:
        return self._dir / f"{session_id}.jsonl"

    def _replay(self, path: Path) -> Session | None:
        session: Session | None = None
        raw = path.read_bytes()
        lines = raw.split(b"\n")
        for idx, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                event = json.loads(line.decode("utf-8"))
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                at_tail = idx == len(lines) - 1 or all(
                    not rest.strip() for rest in lines[idx + 1 :]
                )
                if at_tail:
                    break  # torn final append; everything before it is durable
                raise ParaqaError(f"{path}: corrupt journal line {idx + 1}: {exc}") from exc
            session = self._apply(session, event, path)
        return session

    def _apply(self, session: Session | None, event: dict, path: Path) -> Session:
        kind = event.get("event")
        if kind == "create":
            return Session(
                session_id=event["session_id"],
                task=event["task"],
                items=[
                    Item(
                        item_id=raw["item_id"],
                        uid=raw["uid"],
                        payload={
                            k: v for k, v in raw.items() if k not in ("item_id", "uid")
                        },
                    )
                    for raw in event["items"]
                ],
                created_at=event.get("created_at", ""),
            )
        if kind == "label":
            if session is None:
                raise ParaqaError(f"{path}: label event before create")
            record = LabelRecord(
                session_id=session.session_id,
                item_id=event["item_id"],
                uid=event["uid"],
                label=event["label"],
                annotator=event.get("annotator", ""),
                timestamp=event.get("timestamp", ""),
                system=event.get("system", ""),
            )
            session.labels[record.item_id] = record
            return session
        raise ParaqaError(f"{path}: unknown event {kind!r}")

    def _append(self, session_id: str, event: dict) -> None:
        with open(self._journal_path(session_id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def create_session(self, task: str, raw_items: list) -> Session:
        if task not in TASK_LABELS:
            raise InvalidLabel(f"unknown task {task!r}, expected one of {sorted(TASK_LABELS)}")
        items = _validate_items(raw_items, self._known_uids)
        with self._lock:
            session_id = uuid.uuid4().hex
            session = Session(
                session_id=session_id, task=task, items=items, created_at=_now()
            )
            self._append(
                session_id,
                {
                    "event": "create",
                    "session_id": session_id,
                    "task": task,
                    "items": [it.to_dict() for it in items],
                    "created_at": session.created_at,
                },
            )
            self._sessions[session_id] = session
            return session

    def get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"no session {session_id!r}")
        return session

    def list_sessions(self) -> list[Session]:
        return sorted(self._sessions.values(), key=lambda s: (s.created_at, s.session_id))

    def next_item(self, session_id: str) -> Item | None:
        with self._lock:
            return self.get(session_id).next_item()

    def submit_label(
        self,
        session_id: str,
        item_id: str,
        label: str,
        annotator: str = "",
        overwrite: bool = False,
    ) -> LabelRecord:
        with self._lock:
            session = self.get(session_id)
            item = next((i for i in session.items if i.item_id == item_id), None)
            if item is None:
                raise UnknownItem(f"no item {item_id!r} in session {session_id}")
            if label not in TASK_LABELS[session.task]:
                raise InvalidLabel(
                    f"label {label!r} not valid for task {session.task!r}"
                )
            if item_id in session.labels and not overwrite:
                raise AlreadyLabeled(f"item {item_id!r} already labelled")
            record = LabelRecord(
                session_id=session_id,
                item_id=item_id,
                uid=item.uid,
                label=label,
                annotator=annotator,
                timestamp=_now(),
                system=item.payload.get("system", ""),
            )
            # journal first, acknowledge after: a crash between the two
            # re-applies the label on replay instead of losing it
            self._append(
                session_id,
                {
                    "event": "label",
                    "item_id": item_id,
                    "uid": item.uid,
                    "label": label,
                    "annotator": annotator,
                    "timestamp": record.timestamp,
                    "system": record.system,
                    "overwrite": overwrite,
                },
            )
            session.labels[item_id] = record
            return record

    def export_ndjson(self, session_id: str) -> str:
        with self._lock:
            session = self.get(session_id)
            return "".join(
                json.dumps(r.to_dict(), ensure_ascii=False) + "\n"
                for r in session.export()
            )


_ERROR_STATUS = {
    EmptyItems: 400,
    InvalidLabel: 400,
    UnknownUid: 400,
    UnknownSession: 404,
    UnknownItem: 404,
    AlreadyLabeled: 409,
}


def create_app(data_dir: str | Path, known_uids: set[str] | None = None,
               static_dir: str | Path | None = None):
    """FastAPI app over a SessionStore.

    Endpoints:
      POST /sessions {"task", "items"}            -> {"session_id"}
      GET  /sessions/{id}/next                    -> item | {"done": true}
      POST /sessions/{id}/labels {...}            -> {"ok": true}
      GET  /sessions/{id}/export                  -> NDJSON label records
    plus /health, GET /sessions and GET /sessions/{id} for progress.
    Errors come back as {"code", "message"} with 400/404/409.
    """
    from fastapi import Body, FastAPI
    from fastapi.responses import JSONResponse, Response

    store = SessionStore(data_dir, known_uids)
    app = FastAPI(title="paraqa annotation service")

    def error_response(exc: ParaqaError) -> JSONResponse:
        status = _ERROR_STATUS.get(type(exc), 400)
        return JSONResponse(
            status_code=status,
            content={"code": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/health")
    def health() -> dict:
        return {"ok": True}

    @app.get("/sessions")
    def list_sessions() -> dict:
        return {
            "sessions": [
                {
                    "session_id": s.session_id,
                    "task": s.task,
                    "total": len(s.items),
                    "labeled": len(s.labels),
                }
                for s in store.list_sessions()
            ]
        }

    @app.post("/sessions")
    def create_session(body: dict = Body(...)):
        task = body.get("task")
        items = body.get("items")
        if not isinstance(task, str) or not isinstance(items, list):
            return error_response(EmptyItems("body must carry task and items"))
        try:
            session = store.create_session(task, items)
        except ParaqaError as exc:
            return error_response(exc)
        return {"session_id": session.session_id}

    @app.get("/sessions/{session_id}")
    def session_view(session_id: str):
        try:
            session = store.get(session_id)
        except ParaqaError as exc:
            return error_response(exc)
        return {
            "session_id": session.session_id,
            "task": session.task,
            "total": len(session.items),
            "labeled": len(session.labels),
            "labels": list(TASK_LABELS[session.task]),
        }

    @app.get("/sessions/{session_id}/next")
    def next_item(session_id: str):
        try:
            item = store.next_item(session_id)
        except ParaqaError as exc:
            return error_response(exc)
        if item is None:
            return {"done": True}
        return item.to_dict()

    @app.post("/sessions/{session_id}/labels")
    def submit_label(session_id: str, body: dict = Body(...)):
        try:
            store.submit_label(
                session_id,
                item_id=str(body.get("item_id", "")),
                label=str(body.get("label", "")),
                annotator=str(body.get("annotator", "")),
                overwrite=bool(body.get("overwrite", False)),
            )
        except ParaqaError as exc:
            return error_response(exc)
        return {"ok": True}

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str):
        try:
            payload = store.export_ndjson(session_id)
        except ParaqaError as exc:
            return error_response(exc)
        return Response(content=payload, media_type="application/x-ndjson")

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    app.state.store = store
    return app
