/**
 * Console shell: seeds the store from snapshots, subscribes to the event
 * stream, and re-renders the affected views after every envelope.
 */

import { ApiClient } from "./api.js";
import {
  renderAlarms,
  renderConnection,
  renderEvalReport,
  renderMap,
  renderTransactions,
} from "./render.js";
import { applyEvent, emptyState, seedAlarms, seedMap } from "./store.js";
import { EventStream } from "./stream.js";
import { buildValue, validateOid, validateValue } from "./validate.js";

const OPERATOR_ID = "console";

const params = new URLSearchParams(window.location.search);
const api = new ApiClient(params.get("api") ?? "");
const state = emptyState();
const inflightAcks = new Set<string>();

function el(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found;
}

function renderAll(): void {
  el("map-view").innerHTML = renderMap(state);
  el("alarm-view").innerHTML = renderAlarms(state, inflightAcks);
  el("txn-view").innerHTML = renderTransactions(state);
  el("conn-view").innerHTML = renderConnection(state);
}

async function resync(): Promise<void> {
  seedMap(state, await api.map());
  seedAlarms(state, await api.alarms());
  state.needsResync = false;
  renderAll();
}

async function refreshTxnDetail(txnId: string): Promise<void> {
  try {
    const doc = await api.transaction(txnId);
    const view = state.transactions.get(txnId);
    if (view) {
      view.doc = doc;
      el("txn-view").innerHTML = renderTransactions(state);
    }
  } catch {
    // detail fetch is cosmetic; phases already stream in
  }
}

function startStream(): void {
  const stream = new EventStream(params.get("api") ?? "", {
    onEvent: (envelope) => {
      const changed = applyEvent(state, envelope);
      if (state.needsResync) {
        void resync();
        return;
      }
      if (!changed) return;
      renderAll();
      if (envelope.kind === "TXN_PHASE") {
        void refreshTxnDetail(envelope.payload.txn_id);
      }
    },
    onStatus: (status) => {
      state.connection = status;
      el("conn-view").innerHTML = renderConnection(state);
    },
  });
  void stream.run();
}

function wireAcks(): void {
  el("alarm-view").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const alarmId = target.dataset?.alarm;
    if (!alarmId || inflightAcks.has(alarmId)) return; // exactly-once per click
    inflightAcks.add(alarmId);
    el("alarm-view").innerHTML = renderAlarms(state, inflightAcks);
    api
      .ack(alarmId, OPERATOR_ID)
      .then((alarm) => {
        state.alarms.set(alarm.alarm_id, alarm);
      })
      .catch((error) => showBanner(`acknowledge failed: ${error.message}`))
      .finally(() => {
        inflightAcks.delete(alarmId);
        el("alarm-view").innerHTML = renderAlarms(state, inflightAcks);
      });
  });
}

function showBanner(message: string): void {
  const banner = el("error-banner");
  banner.textContent = message;
  banner.classList.remove("hidden");
  setTimeout(() => banner.classList.add("hidden"), 6000);
}

function wireConfigForm(): void {
  const form = el("config-form") as HTMLFormElement;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const device = (el("cfg-device") as HTMLSelectElement).value;
    const oid = (el("cfg-oid") as HTMLInputElement).value;
    const type = (el("cfg-type") as HTMLSelectElement).value;
    const value = (el("cfg-value") as HTMLInputElement).value;
    const problem = validateOid(oid) ?? validateValue(type, value);
    const inline = el("cfg-error");
    if (problem) {
      inline.textContent = problem;
      inline.classList.remove("hidden");
      return; // invalid input never reaches the gateway
    }
    inline.classList.add("hidden");
    api
      .submitTransaction(device, OPERATOR_ID, [
        { via: "SNMP_SET", oid: oid.trim(), value: buildValue(type, value) },
      ])
      .then((accepted) => {
        state.transactions.set(accepted.txn_id, {
          txn_id: accepted.txn_id,
          device,
          phases: [],
          errors: [],
          doc: null,
        });
        el("txn-view").innerHTML = renderTransactions(state);
      })
      .catch((error) => showBanner(`transaction rejected: ${error.message}`));
  });
}

async function populateDeviceSelect(): Promise<void> {
  const select = el("cfg-device") as HTMLSelectElement;
  select.innerHTML = [...state.nodes.keys()]
    .sort()
    .map((id) => `<option value="${id}">${id}</option>`)
    .join("");
}

async function loadEval(): Promise<void> {
  try {
    el("eval-view").innerHTML = renderEvalReport(await api.evalReport());
  } catch {
    el("eval-view").innerHTML = `<p class="empty">No evaluation profiles configured.</p>`;
  }
}

async function start(): Promise<void> {
  await resync();
  await populateDeviceSelect();
  wireAcks();
  wireConfigForm();
  startStream();
  void loadEval();
}

void start();
