/**
 * Console state and the event reducer.
 *
 * All state originates from the gateway: snapshots seed the store, then
 * every EventEnvelope is applied synchronously, so a view rendered right
 * after applyEvent() already reflects the event. The UI never re-derives
 * icons or statuses on its own.
 */

import type {
  AlarmDoc,
  EventEnvelope,
  MapDocument,
  MapNodeDoc,
  TransactionDoc,
} from "./types.js";

export interface TxnView {
  txn_id: string;
  device: string;
  phases: string[]; // in observed order, e.g. PLANNED, APPLYING, ...
  errors: string[];
  doc: TransactionDoc | null; // filled by a detail fetch
}

export type ConnectionState = "connecting" | "live" | "stale";

export interface ConsoleState {
  root: { host_id: string; icon: string };
  nodes: Map<string, MapNodeDoc>;
  alarms: Map<string, AlarmDoc>;
  transactions: Map<string, TxnView>;
  lastSeq: number;
  connection: ConnectionState;
  needsResync: boolean;
}

export function emptyState(): ConsoleState {
  return {
    root: { host_id: "management-station", icon: "management-station" },
    nodes: new Map(),
    alarms: new Map(),
    transactions: new Map(),
    lastSeq: 0,
    connection: "connecting",
    needsResync: false,
  };
}

export function seedMap(state: ConsoleState, doc: MapDocument): void {
  state.root = doc.root;
  state.nodes = new Map(doc.nodes.map((n) => [n.host_id, { ...n }]));
}

export function seedAlarms(state: ConsoleState, alarms: AlarmDoc[]): void {
  state.alarms = new Map(alarms.map((a) => [a.alarm_id, { ...a }]));
}

function hostFor(state: ConsoleState, objectId: string): MapNodeDoc | undefined {
  const direct = state.nodes.get(objectId);
  if (direct) return direct;
  // service ids roll up to their host part (host/service)
  const hostPart = objectId.split("/", 1)[0];
  return state.nodes.get(hostPart);
}

function liveAlarmOnHost(state: ConsoleState, hostId: string): boolean {
  for (const alarm of state.alarms.values()) {
    if (alarm.state === "CLOSED") continue;
    const node = hostFor(state, alarm.object_id);
    if (node && node.host_id === hostId) return true;
  }
  return false;
}

/** Applies one envelope; returns true when the event changed the state. */
export function applyEvent(state: ConsoleState, envelope: EventEnvelope): boolean {
  if (envelope.kind !== "RESYNC" && envelope.seq <= state.lastSeq) {
    return false; // replayed duplicate
  }
  if (envelope.seq > 0) state.lastSeq = envelope.seq;
  const p = envelope.payload;

  switch (envelope.kind) {
    case "ALARM_OPENED": {
      state.alarms.set(p.alarm_id, {
        alarm_id: p.alarm_id,
        object_id: p.object_id,
        severity: p.severity ?? p.status ?? "UNKNOWN",
        opened_ts: envelope.ts,
        state: "OPEN",
        ack_by: null,
        closed_ts: null,
        detail: p.detail ?? "",
      });
      const node = hostFor(state, p.object_id);
      if (node) node.alarmed = true;
      return true;
    }
    case "ALARM_CLOSED": {
      const alarm = p.alarm_id ? state.alarms.get(p.alarm_id) : undefined;
      const found =
        alarm ??
        [...state.alarms.values()].find(
          (a) => a.object_id === p.object_id && a.state !== "CLOSED",
        );
      if (found) {
        found.state = "CLOSED";
        found.closed_ts = envelope.ts;
      }
      const node = hostFor(state, p.object_id);
      if (node) node.alarmed = liveAlarmOnHost(state, node.host_id);
      return true;
    }
    case "STATE_CHANGED": {
      // check-level status; the map status arrives via MAP_CHANGED
      return true;
    }
    case "MAP_CHANGED": {
      const statuses: Record<string, string> = p.statuses ?? {};
      for (const [hostId, status] of Object.entries(statuses)) {
        const node = state.nodes.get(hostId);
        if (node) node.status = status;
      }
      return true;
    }
    case "TXN_PHASE": {
      const view: TxnView = state.transactions.get(p.txn_id) ?? {
        txn_id: p.txn_id,
        device: p.device,
        phases: [],
        errors: [],
        doc: null,
      };
      if (view.phases[view.phases.length - 1] !== p.phase) {
        view.phases.push(p.phase);
      }
      view.errors = p.errors ?? view.errors;
      state.transactions.set(p.txn_id, view);
      return true;
    }
    case "RESYNC": {
      state.needsResync = true;
      return true;
    }
    default:
      return false;
  }
}

export function openAlarms(state: ConsoleState): AlarmDoc[] {
  return [...state.alarms.values()]
    .filter((a) => a.state !== "CLOSED")
    .sort((a, b) => a.opened_ts - b.opened_ts || a.alarm_id.localeCompare(b.alarm_id));
}

export function transactionsNewestFirst(state: ConsoleState): TxnView[] {
  return [...state.transactions.values()].sort((a, b) =>
    b.txn_id.localeCompare(a.txn_id),
  );
}
