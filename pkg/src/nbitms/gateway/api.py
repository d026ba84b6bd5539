"""HTTP surface of the engine.

Fixed paths under /api/v1: map, objects, alarms (+ack), configuration
transactions, the evaluation report, and the event stream (one JSON envelope
per line, resumable with ?since=). GETs never mutate engine state.
"""

from __future__ import annotations

import asyncio
import json
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from nbitms.core.alarms import AlarmState
from nbitms.configmgmt import DeviceDirective, DirectiveVia, OperatorCommand
from nbitms.engine import Engine
from nbitms.errors import DomainError, InvalidStateError, NbitmsError, NotFoundError
from nbitms.evaluation import compare_tools, load_profiles, render_report
from nbitms.gateway.models import (
    AckRequest,
    AlarmListResponse,
    AlarmModel,
    ErrorResponse,
    EvalReportResponse,
    MapDocumentResponse,
    ObjectListResponse,
    ObjectModel,
    StateRecordModel,
    TransactionAccepted,
    TransactionModel,
    TransactionRequest,
)
from nbitms.snmp.oid import Oid
from nbitms.snmp.values import value_from_json

STREAM_POLL_S = 0.05


def _alarm_model(alarm) -> AlarmModel:
    return AlarmModel(
        alarm_id=alarm.alarm_id,
        object_id=alarm.object_id,
        severity=alarm.severity.value,
        opened_ts=alarm.opened_ts,
        state=alarm.state.value,
        ack_by=alarm.ack_by,
        closed_ts=alarm.closed_ts,
        detail=alarm.detail,
    )


def _error(status_code: int, message: str, problems: Optional[list[str]] = None) -> JSONResponse:
    body = ErrorResponse(error=message, problems=problems or [])
    return JSONResponse(status_code=status_code, content=body.model_dump())


def create_app(engine: Engine, eval_profiles_path=None, capacities=None, ui_dir=None) -> FastAPI:
    app = FastAPI(title="nbitms", version="1.0")
    app.state.engine = engine
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(NbitmsError)
    async def handle_domain_errors(_request: Request, exc: NbitmsError):
        if isinstance(exc, NotFoundError):
            return _error(404, str(exc))
        if isinstance(exc, InvalidStateError):
            return _error(409, str(exc))
        if isinstance(exc, DomainError):
            return _error(400, str(exc))
        problems = getattr(exc, "problems", None)
        return _error(400, str(exc), problems)

    @app.get("/api/v1/objects", response_model=ObjectListResponse)
    def get_objects():
        snapshot = engine.snapshot()
        records = {r.object_id: r for r in snapshot.records}
        objects = []
        for obj_id in sorted(engine.objects):
            obj = engine.objects[obj_id]
            record = records.get(obj_id)
            objects.append(
                ObjectModel(
                    id=obj.id,
                    kind=obj.kind.value,
                    display_name=obj.display_name,
                    address=obj.address,
                    parent_host=obj.parent_host,
                    check_command=obj.check_command,
                    check_interval_s=obj.check_interval_s,
                    retry_interval_s=obj.retry_interval_s,
                    max_check_attempts=obj.max_check_attempts,
                    state=StateRecordModel(
                        object_id=record.object_id,
                        current_status=record.current_status.value,
                        state_type=record.state_type.value,
                        attempt=record.attempt,
                        last_check_ts=record.last_check_ts,
                        last_hard_change_ts=record.last_hard_change_ts,
                        last_output=record.last_output,
                    )
                    if record
                    else None,
                )
            )
        return ObjectListResponse(objects=objects)

    @app.get("/api/v1/map", response_model=MapDocumentResponse)
    def get_map():
        return MapDocumentResponse(**engine.map_document())

    @app.get("/api/v1/alarms", response_model=AlarmListResponse)
    def get_alarms(state: Optional[str] = Query(default=None)):
        wanted = AlarmState(state) if state else None
        return AlarmListResponse(alarms=[_alarm_model(a) for a in engine.alarm_list(wanted)])

    @app.post("/api/v1/alarms/{alarm_id}/ack", response_model=AlarmModel)
    def ack_alarm(alarm_id: str, body: AckRequest):
        return _alarm_model(engine.ack_alarm(alarm_id, body.operator_id))

    @app.post(
        "/api/v1/config/{device}/transactions",
        response_model=TransactionAccepted,
        status_code=202,
    )
    def post_transaction(device: str, body: TransactionRequest):
        directives = []
        for i, d in enumerate(body.directives, 1):
            try:
                via = DirectiveVia(d.via)
                if via == DirectiveVia.SNMP_SET:
                    if not d.oid or d.value is None:
                        return _error(400, f"directive {i}: SNMP_SET needs oid and value")
                    directives.append(
                        DeviceDirective(
                            via=via,
                            oid=Oid(d.oid),
                            intended_value=value_from_json(d.value.to_dict()),
                        )
                    )
                else:
                    directives.append(
                        DeviceDirective(
                            via=via,
                            plugin_name=d.plugin_name,
                            plugin_args=tuple(d.plugin_args),
                        )
                    )
            except ValueError as exc:
                return _error(400, f"directive {i}: {exc}")
        cmd = OperatorCommand(
            command_id=body.command_id or f"cmd-{uuid.uuid4().hex[:12]}",
            operator_id=body.operator_id,
            target_device=device,
            directives=tuple(directives),
            issued_ts=engine.clock.now(),
        )
        txn_id = engine.config_manager.submit(cmd)
        return TransactionAccepted(txn_id=txn_id, device=device, phase="SUBMITTED")

    @app.get("/api/v1/config/transactions/{txn_id}", response_model=TransactionModel)
    def get_transaction(txn_id: str):
        return TransactionModel(**engine.transaction(txn_id))

    @app.get("/api/v1/eval/report", response_model=EvalReportResponse)
    def get_eval_report():
        if eval_profiles_path is None:
            return _error(404, "no evaluation profile file configured")
        profiles = load_profiles(eval_profiles_path)
        report = compare_tools(profiles, capacities=capacities)
        doc = report.to_json()
        doc["rendered"] = render_report(report)
        return EvalReportResponse(**doc)

    @app.get("/api/v1/events")
    async def get_events(
        since: int = Query(default=0, ge=0),
        follow: bool = Query(default=True),
    ):
        async def stream():
            cursor = since
            envelopes, needs_resync = engine.events_since(cursor)
            if needs_resync:
                resync = {
                    "seq": 0,
                    "ts": engine.clock.now(),
                    "kind": "RESYNC",
                    "payload": {"reason": "replay buffer overflow; refetch snapshots"},
                }
                yield json.dumps(resync, sort_keys=True) + "\n"
            for envelope in envelopes:
                cursor = envelope.seq
                yield json.dumps(envelope.to_json(), sort_keys=True) + "\n"
            while follow:
                await asyncio.sleep(STREAM_POLL_S)
                envelopes, _ = engine.events_since(cursor)
                for envelope in envelopes:
                    cursor = envelope.seq
                    yield json.dumps(envelope.to_json(), sort_keys=True) + "\n"

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    if ui_dir and Path(ui_dir).is_dir():
        # operator console assets; mounted last so /api/v1 wins
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="console")

    return app
