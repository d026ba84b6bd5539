"""Pydantic request/response models for the HTTP API (v1).

These mirror the engine's domain objects into stable wire shapes; every
response carries api_version so clients can pin it.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

API_VERSION = "v1"


class ValueModel(BaseModel):
    type: str
    value: Optional[object] = None
    hex: Optional[str] = None
    tag: Optional[int] = None

    def to_dict(self) -> dict:
        doc = {"type": self.type}
        if self.value is not None:
            doc["value"] = self.value
        if self.hex is not None:
            doc["hex"] = self.hex
        if self.tag is not None:
            doc["tag"] = self.tag
        return doc


class StateRecordModel(BaseModel):
    object_id: str
    current_status: str
    state_type: str
    attempt: int
    last_check_ts: Optional[float] = None
    last_hard_change_ts: Optional[float] = None
    last_output: str = ""


class ObjectModel(BaseModel):
    id: str
    kind: str
    display_name: str
    address: str
    parent_host: Optional[str] = None
    check_command: str
    check_interval_s: float
    retry_interval_s: float
    max_check_attempts: int
    state: Optional[StateRecordModel] = None


class ObjectListResponse(BaseModel):
    api_version: str = API_VERSION
    objects: list[ObjectModel]


class AlarmModel(BaseModel):
    alarm_id: str
    object_id: str
    severity: str
    opened_ts: float
    state: str
    ack_by: Optional[str] = None
    closed_ts: Optional[float] = None
    detail: str = ""


class AlarmListResponse(BaseModel):
    api_version: str = API_VERSION
    alarms: list[AlarmModel]


class AckRequest(BaseModel):
    operator_id: str = Field(min_length=1)


class MapRootModel(BaseModel):
    host_id: str
    icon: str


class MapNodeModel(BaseModel):
    host_id: str
    label: str
    icon: str
    status: str
    alarmed: bool
    parent: str
    position: Optional[list[float]] = None


class MapDocumentResponse(BaseModel):
    api_version: str = API_VERSION
    generated_ts: float
    root: MapRootModel
    nodes: list[MapNodeModel]


class DirectiveRequest(BaseModel):
    via: str = "SNMP_SET"
    oid: Optional[str] = None
    value: Optional[ValueModel] = None
    plugin_name: Optional[str] = None
    plugin_args: list[str] = Field(default_factory=list)


class TransactionRequest(BaseModel):
    operator_id: str = Field(min_length=1)
    command_id: Optional[str] = None
    directives: list[DirectiveRequest] = Field(min_length=1)


class TransactionAccepted(BaseModel):
    api_version: str = API_VERSION
    txn_id: str
    device: str
    phase: str


class DirectiveResultModel(BaseModel):
    index: int
    describe: str
    via: str
    oid: Optional[str] = None
    intended_value: Optional[dict] = None
    status: str
    detail: str = ""


class TransactionModel(BaseModel):
    api_version: str = API_VERSION
    txn_id: str
    device: str
    operator: str
    phase: str
    phase_timestamps: dict
    warnings: list[str] = Field(default_factory=list)
    errors: list[str] = Field(default_factory=list)
    directives: list[DirectiveResultModel] = Field(default_factory=list)


class EvalToolRow(BaseModel):
    fcaps_score: float
    aggregate: float
    per_function: dict
    coverage: list[str]


class EvalReportResponse(BaseModel):
    api_version: str = API_VERSION
    window: list[float]
    notes: dict
    ranking: list[str]
    tools: dict[str, EvalToolRow]
    rendered: str


class ErrorResponse(BaseModel):
    api_version: str = API_VERSION
    error: str
    problems: list[str] = Field(default_factory=list)
