"""HTTP facade: model storage, queries, elicitation sessions, synergy
expansion.

State is directory-backed JSON. Writes go through a temp file and an
atomic rename, under a per-id lock, and every successful mutation bumps
the stored version. Session mutations also require the client to echo
the position it saw, so two concurrent commits cannot both win.
"""
from __future__ import annotations

import json
import os
import threading
import uuid
from pathlib import Path
from typing import Any, Mapping

from fastapi import Body, FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from . import elicitation
from .algebra import SynergySpec, expand_synergy, validate_synergy
from .errors import (
    BipartiteViolation,
    CausalProcError,
    CycleError,
    IllegalOrder,
    Incoherent,
    InvalidSpec,
    ModelFormatError,
    ModelTooLarge,
    NetImportError,
    NoAcceptedSamples,
    NonConvergence,
    NormalizationError,
    OutOfRange,
    RangeError,
    SessionStateError,
    SingletonDefault,
    StructureError,
    TableDomainError,
    UndefinedConditional,
    ZeroEvidence,
)
from .inference import Query, estimate_query, query
from .model import build_model, model_to_doc, parse_model, validate_model


class NotFound(CausalProcError, KeyError):
    """No stored object under the requested id."""

    def __init__(self, kind: str, obj_id: str):
        self.kind = kind
        self.obj_id = obj_id
        super().__init__(f"{kind} {obj_id!r} not found")


class Gone(CausalProcError, RuntimeError):
    """The session finished; only reads remain meaningful."""


class StalePosition(CausalProcError, RuntimeError):
    """The echoed position no longer matches the stored session."""

    def __init__(self, sent: int, stored: int):
        self.sent = sent
        self.stored = stored
        super().__init__(
            f"request was built against position {sent}, session is at "
            f"{stored}"
        )


_STATUS: list[tuple[type, int]] = [
    (NotFound, 404),
    (Gone, 410),
    (ModelTooLarge, 413),
    (StalePosition, 409),
    (OutOfRange, 409),
    (SingletonDefault, 409),
    (UndefinedConditional, 409),
    (SessionStateError, 409),
    (ZeroEvidence, 409),
    (NoAcceptedSamples, 409),
    (Incoherent, 409),
    (NonConvergence, 409),
    (ModelFormatError, 400),
    (NetImportError, 400),
    (IllegalOrder, 400),
    (InvalidSpec, 400),
    (CycleError, 400),
    (BipartiteViolation, 400),
    (TableDomainError, 400),
    (NormalizationError, 400),
    (RangeError, 400),
    (StructureError, 400),
]


def _status_for(exc: CausalProcError) -> int:
    for cls, status in _STATUS:
        if isinstance(exc, cls):
            return status
    return 400


def _details_for(exc: CausalProcError) -> dict:
    if isinstance(exc, OutOfRange):
        return {"value": exc.value, "lo": exc.lo, "hi": exc.hi}
    if isinstance(exc, CycleError):
        return {"cycle": exc.cycle}
    if isinstance(exc, InvalidSpec):
        return {"violations": [vars(v) for v in exc.violations]}
    if isinstance(exc, StalePosition):
        return {"sent": exc.sent, "stored": exc.stored}
    return {}


class _Locks:
    def __init__(self):
        self._guard = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}

    def for_id(self, key: str) -> threading.Lock:
        with self._guard:
            if key not in self._locks:
                self._locks[key] = threading.Lock()
            return self._locks[key]


def _write_json(path: Path, payload: Any) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(
        json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    os.replace(tmp, path)


def _read_json(path: Path) -> Any:
    return json.loads(path.read_text(encoding="utf-8"))


class ModelStore:
    """Directory of model documents with a per-model version counter."""

    def __init__(self, root: Path):
        self.root = root
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks = _Locks()

    def _path(self, model_id: str) -> Path:
        return self.root / f"{model_id}.json"

    def create(self, document: Mapping) -> tuple[str, int]:
        model_id = uuid.uuid4().hex[:12]
        record = {"id": model_id, "version": 1, "document": document}
        with self._locks.for_id(model_id):
            _write_json(self._path(model_id), record)
        return model_id, 1

    def get(self, model_id: str) -> dict:
        path = self._path(model_id)
        if not path.exists():
            raise NotFound("model", model_id)
        return _read_json(path)

    def list_ids(self) -> list[dict]:
        out = []
        for path in sorted(self.root.glob("*.json")):
            record = _read_json(path)
            out.append({"id": record["id"], "version": record["version"]})
        return out

    def delete(self, model_id: str) -> None:
        path = self._path(model_id)
        with self._locks.for_id(model_id):
            if not path.exists():
                raise NotFound("model", model_id)
            path.unlink()

    def update_document(self, model_id: str, document: Mapping) -> int:
        with self._locks.for_id(model_id):
            record = self.get(model_id)
            record["document"] = document
            record["version"] += 1
            _write_json(self._path(model_id), record)
            return record["version"]


class SessionStore:
    """Directory of elicitation sessions plus an append-only action log."""

    def __init__(self, root: Path):
        self.root = root
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks = _Locks()

    def _path(self, sid: str) -> Path:
        return self.root / f"{sid}.json"

    def _log_path(self, sid: str) -> Path:
        return self.root / f"{sid}.log"

    def create(self, model_id: str, session: elicitation.ElicitationSession) -> dict:
        sid = uuid.uuid4().hex[:12]
        record = {
            "id": sid,
            "model_id": model_id,
            "completed": False,
            "installed_version": None,
            "session": elicitation.session_to_doc(session),
        }
        with self._locks.for_id(sid):
            _write_json(self._path(sid), record)
        return record

    def get(self, sid: str) -> dict:
        path = self._path(sid)
        if not path.exists():
            raise NotFound("session", sid)
        return _read_json(path)

    def lock(self, sid: str) -> threading.Lock:
        return self._locks.for_id(sid)

    def put(self, record: dict) -> None:
        _write_json(self._path(record["id"]), record)

    def log(self, sid: str, entry: dict) -> None:
        with self._log_path(sid).open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")


def _session_state(record: dict) -> dict:
    session = elicitation.session_from_doc(record["session"])
    state = elicitation.session_to_doc(session)
    state["id"] = record["id"]
    state["model_id"] = record["model_id"]
    state["total"] = len(session.sequence.subsets)
    state["done"] = session.done
    state["current"] = None if session.done else sorted(session.current)
    state["completed"] = record["completed"]
    state["installed_version"] = record["installed_version"]
    return state


def _table_rows(table: Mapping[frozenset, float]) -> list[dict]:
    entries = sorted(table.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
    return [{"subset": sorted(k), "p": v} for k, v in entries]


def _as_id_list(raw: Any, field: str) -> list[str]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise ModelFormatError(f"{field!r} must be a list of event ids")
    return [str(x) for x in raw]


def create_app(store_dir: str | Path) -> FastAPI:
    root = Path(store_dir)
    models = ModelStore(root / "models")
    sessions = SessionStore(root / "sessions")
    app = FastAPI(title="causalproc service")
    # the browser workbench is served as static files from another origin
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(CausalProcError)
    async def _on_error(_request: Request, exc: CausalProcError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={
                "code": type(exc).__name__,
                "message": str(exc.args[0]) if exc.args else str(exc),
                "details": _details_for(exc),
            },
        )

    def _load_model(model_id: str):
        record = models.get(model_id)
        return record, build_model(record["document"])

    @app.post("/models", status_code=201)
    async def create_model(payload: dict = Body(...)):
        model = parse_model(payload)
        violations = validate_model(model)
        if violations:
            return JSONResponse(
                status_code=400,
                content={
                    "code": "InvalidModel",
                    "message": f"{len(violations)} violations",
                    "details": {"violations": [vars(v) for v in violations]},
                },
            )
        model_id, version = models.create(model_to_doc(model))
        return {"id": model_id, "version": version}

    @app.get("/models")
    async def list_models():
        return {"models": models.list_ids()}

    @app.get("/models/{model_id}")
    async def get_model(model_id: str):
        record = models.get(model_id)
        return {
            "id": record["id"],
            "version": record["version"],
            "document": record["document"],
        }

    @app.delete("/models/{model_id}", status_code=204)
    async def delete_model(model_id: str):
        models.delete(model_id)
        return Response(status_code=204)

    @app.post("/models/{model_id}/query")
    async def run_query(model_id: str, payload: dict = Body(...)):
        _, model = _load_model(model_id)
        q = Query(
            targets=frozenset(_as_id_list(payload.get("targets"), "targets")),
            true=frozenset(_as_id_list(payload.get("true"), "true")),
            false=frozenset(_as_id_list(payload.get("false"), "false")),
        )
        method = payload.get("method", "exact")
        if method == "exact":
            try:
                return {"method": "exact", "probability": query(model, q)}
            except ModelTooLarge as exc:
                raise ModelTooLarge(
                    f"{exc.args[0]}; retry with method=sample"
                ) from exc
        if method == "sample":
            n = int(payload.get("n", 10000))
            seed = int(payload.get("seed", 0))
            est, se = estimate_query(model, q, n=n, seed=seed)
            return {
                "method": "sample",
                "estimate": est,
                "standard_error": se,
                "n": n,
                "seed": seed,
            }
        raise ModelFormatError(f"unknown query method {method!r}")

    @app.post("/models/{model_id}/sessions", status_code=201)
    async def start_session(model_id: str, payload: dict = Body(...)):
        _, model = _load_model(model_id)
        process = str(payload.get("process", ""))
        if process not in model.kinds or not model.is_process(process):
            raise StructureError(f"{process!r} is not a process in the model")
        effects = sorted(model.effects_of[process])
        session = elicitation.start_session(process, effects)
        record = sessions.create(model_id, session)
        sessions.log(record["id"], {"op": "start", "process": process})
        return _session_state(record)

    @app.get("/sessions/{sid}")
    async def get_session(sid: str):
        return _session_state(sessions.get(sid))

    @app.get("/sessions/{sid}/range")
    async def session_range(sid: str):
        record = sessions.get(sid)
        if record["completed"]:
            raise Gone("session already completed")
        session = elicitation.session_from_doc(record["session"])
        rng = elicitation.next_range(session)
        return {
            "subset": sorted(session.current),
            "position": session.position,
            "lo": rng.lo,
            "hi": rng.hi,
        }

    def _mutate_session(sid: str, sent_position: int, op, log_entry: dict) -> dict:
        """Apply ``op`` to the stored session under its lock, enforcing
        the echoed-position check."""
        with sessions.lock(sid):
            record = sessions.get(sid)
            if record["completed"]:
                raise Gone("session already completed")
            session = elicitation.session_from_doc(record["session"])
            if sent_position != session.position:
                raise StalePosition(sent_position, session.position)
            session = op(session)
            record["session"] = elicitation.session_to_doc(session)
            sessions.put(record)
            sessions.log(sid, {"position": sent_position, **log_entry})
            return record

    @app.post("/sessions/{sid}/commit")
    async def session_commit(sid: str, payload: dict = Body(...)):
        if "value" not in payload:
            raise ModelFormatError("commit needs a 'value'")
        value = float(payload["value"])
        position = int(payload.get("position", -1))
        given = _as_id_list(payload.get("given"), "given")

        def op(session):
            if given:
                return elicitation.commit_conditional(session, given, value)
            return elicitation.commit(session, value)

        entry = {"op": "commit", "value": value}
        if given:
            entry["given"] = sorted(given)
        record = _mutate_session(sid, position, op, entry)
        return _session_state(record)

    @app.post("/sessions/{sid}/default")
    async def session_default(sid: str, payload: dict = Body(default={})):
        position = int(payload.get("position", -1))
        record = _mutate_session(
            sid, position, elicitation.default_current, {"op": "default"}
        )
        return _session_state(record)

    @app.post("/sessions/{sid}/complete")
    async def session_complete(sid: str):
        with sessions.lock(sid):
            record = sessions.get(sid)
            if record["completed"]:
                raise Gone("session already completed")
            session = elicitation.session_from_doc(record["session"])
            table = elicitation.complete(session)

            model_record, model = _load_model(record["model_id"])
            process = session.process
            if (
                process not in model.kinds
                or not model.is_process(process)
                or frozenset(session.sequence.events) != model.effects_of[process]
            ):
                raise SessionStateError(
                    f"model {record['model_id']} no longer matches the "
                    f"session (process {process!r} effects changed)"
                )
            doc = dict(model_record["document"])
            causal = dict(doc.get("causal") or {})
            causal[process] = _table_rows(table)
            doc["causal"] = causal
            built = build_model(doc)
            version = models.update_document(
                record["model_id"], model_to_doc(built)
            )
            record["completed"] = True
            record["installed_version"] = version
            sessions.put(record)
            sessions.log(sid, {"op": "complete", "installed_version": version})
        state = _session_state(record)
        state["table"] = _table_rows(table)
        return state

    @app.post("/synergy/expand")
    async def synergy_expand(payload: dict = Body(...)):
        spec_doc = payload.get("spec")
        if spec_doc is None:
            raise ModelFormatError("body needs a 'spec' block")
        spec = SynergySpec.from_doc(spec_doc)
        violations = validate_synergy(spec)
        if violations:
            return {
                "violations": [vars(v) for v in violations],
                "table": None,
            }
        table = expand_synergy(spec)
        result: dict[str, Any] = {
            "violations": [],
            "table": _table_rows(table),
        }
        install = payload.get("install")
        if install:
            model_id = str(install.get("model_id", ""))
            process = str(install.get("process", spec.target))
            _, model = _load_model(model_id)
            if process not in model.kinds or not model.is_process(process):
                raise StructureError(
                    f"{process!r} is not a process in the model"
                )
            if frozenset(spec.parents) != model.trigger_set[process]:
                raise StructureError(
                    f"spec parents {sorted(spec.parents)} do not match the "
                    f"triggers of {process!r}"
                )
            record = models.get(model_id)
            doc = dict(record["document"])
            effectual = dict(doc.get("effectual") or {})
            effectual[process] = _table_rows(table)
            doc["effectual"] = effectual
            synergy = dict(doc.get("synergy") or {})
            synergy.pop(process, None)
            if synergy:
                doc["synergy"] = synergy
            else:
                doc.pop("synergy", None)
            built = build_model(doc)
            result["installed_version"] = models.update_document(
                model_id, model_to_doc(built)
            )
        return result

    app.state.models = models
    app.state.sessions = sessions
    return app
