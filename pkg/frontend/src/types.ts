/** Wire types of the engine HTTP API (v1). The console pins api_version v1. */

export interface EventEnvelope {
  seq: number;
  ts: number;
  kind: string;
  payload: Record<string, any>;
}

export interface MapNodeDoc {
  host_id: string;
  label: string;
  icon: string;
  status: string; // UP | DOWN | UNREACHABLE
  alarmed: boolean;
  parent: string;
  position: [number, number] | null;
}

export interface MapDocument {
  api_version: string;
  generated_ts: number;
  root: { host_id: string; icon: string };
  nodes: MapNodeDoc[];
}

export interface AlarmDoc {
  alarm_id: string;
  object_id: string;
  severity: string;
  opened_ts: number;
  state: string; // OPEN | ACKNOWLEDGED | CLOSED
  ack_by: string | null;
  closed_ts: number | null;
  detail: string;
}

export interface ObjectDoc {
  id: string;
  kind: string;
  display_name: string;
  address: string;
  parent_host: string | null;
  check_command: string;
  state: {
    current_status: string;
    state_type: string;
    attempt: number;
    last_check_ts: number | null;
    last_output: string;
  } | null;
}

export interface TransactionDoc {
  txn_id: string;
  device: string;
  operator: string;
  phase: string;
  phase_timestamps: Record<string, number>;
  warnings: string[];
  errors: string[];
  directives: {
    index: number;
    describe: string;
    via: string;
    oid: string | null;
    status: string;
    detail: string;
  }[];
}

export interface EvalReportDoc {
  api_version: string;
  window: number[];
  notes: Record<string, unknown>;
  ranking: string[];
  tools: Record<
    string,
    {
      fcaps_score: number;
      aggregate: number;
      per_function: Record<string, number>;
      coverage: string[];
    }
  >;
  rendered: string;
}

export interface DirectiveInput {
  via: string;
  oid?: string;
  value?: { type: string; value: unknown };
  plugin_name?: string;
  plugin_args?: string[];
}
