/**
 * Pure HTML renderers: state in, markup out. The shell assigns innerHTML,
 * so every view is testable without a browser.
 */

import { iconSvg } from "./icons.js";
import { layoutMap } from "./layout.js";
import type { ConsoleState, TxnView } from "./store.js";
import { openAlarms, transactionsNewestFirst } from "./store.js";
import type { AlarmDoc, EvalReportDoc } from "./types.js";

const STATUS_CLASS: Record<string, string> = {
  UP: "up",
  OK: "up",
  WARNING: "warning",
  DOWN: "down",
  CRITICAL: "down",
  UNKNOWN: "unknown",
  UNREACHABLE: "unreachable",
};

export function esc(text: unknown): string {
  return String(text)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function statusClass(status: string): string {
  return STATUS_CLASS[status] ?? "unknown";
}

export function renderMap(state: ConsoleState): string {
  const layout = layoutMap(state.root.host_id, [...state.nodes.values()]);
  const positions = new Map<string, { x: number; y: number }>();
  positions.set(state.root.host_id, { x: layout.rootX, y: layout.rootY });
  for (const p of layout.placed) positions.set(p.node.host_id, { x: p.x, y: p.y });

  const edges = layout.placed
    .map((p) => {
      const parent = positions.get(p.node.parent) ?? positions.get(state.root.host_id)!;
      return `<line class="edge" x1="${parent.x}" y1="${parent.y}" x2="${p.x}" y2="${p.y}"/>`;
    })
    .join("");

  const rootNode = `
    <g class="node root" transform="translate(${layout.rootX},${layout.rootY})">
      <g class="glyph">${iconSvg(state.root.icon, 36)}</g>
      <text class="label" y="34">${esc(state.root.host_id)}</text>
    </g>`;

  const nodes = layout.placed
    .map((p) => {
      const cls = statusClass(p.node.status);
      const alarmBadge = p.node.alarmed
        ? `<circle class="alarm-dot" cx="20" cy="-16" r="6"/>`
        : "";
      return `
    <g class="node ${cls}${p.node.alarmed ? " alarmed" : ""}" data-host="${esc(p.node.host_id)}"
       transform="translate(${p.x},${p.y})">
      <g class="glyph">${iconSvg(p.node.icon, 36)}</g>
      ${alarmBadge}
      <text class="label" y="34">${esc(p.node.label)}</text>
      <text class="status" y="48">${esc(p.node.status)}</text>
    </g>`;
    })
    .join("");

  return `<svg class="topology" viewBox="0 0 ${layout.width} ${layout.height}"
     preserveAspectRatio="xMidYMin meet">
    <defs>
      <pattern id="hatch" width="6" height="6" patternTransform="rotate(45)" patternUnits="userSpaceOnUse">
        <line x1="0" y1="0" x2="0" y2="6" stroke="currentColor" stroke-width="2"/>
      </pattern>
    </defs>
    ${edges}${rootNode}${nodes}
  </svg>`;
}

export function renderAlarmRow(alarm: AlarmDoc, inflight: boolean): string {
  const ackCell =
    alarm.state === "OPEN"
      ? `<button class="ack" data-alarm="${esc(alarm.alarm_id)}"${inflight ? " disabled" : ""}>
           ${inflight ? "acking..." : "acknowledge"}</button>`
      : `<span class="ack-by">ack ${esc(alarm.ack_by ?? "")}</span>`;
  return `<tr class="alarm ${statusClass(alarm.severity)}" data-alarm-row="${esc(alarm.alarm_id)}">
    <td class="sev">${esc(alarm.severity)}</td>
    <td class="obj">${esc(alarm.object_id)}</td>
    <td class="detail">${esc(alarm.detail)}</td>
    <td class="ts">${alarm.opened_ts.toFixed(1)}</td>
    <td>${ackCell}</td>
  </tr>`;
}

export function renderAlarms(state: ConsoleState, inflight: Set<string>): string {
  const rows = openAlarms(state)
    .map((a) => renderAlarmRow(a, inflight.has(a.alarm_id)))
    .join("");
  if (!rows) return `<p class="empty">No open alarms.</p>`;
  return `<table class="alarms">
    <thead><tr><th>severity</th><th>object</th><th>detail</th><th>opened</th><th></th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}

const PHASE_SEQUENCE = ["PLANNED", "APPLYING", "VERIFYING", "COMMITTED"];

export function renderTxnCard(view: TxnView): string {
  const terminal = view.phases[view.phases.length - 1] ?? "";
  const stateCls =
    terminal === "COMMITTED" ? "done" : terminal === "ROLLED_BACK" || terminal === "FAILED" ? "error" : "active";
  const steps = PHASE_SEQUENCE.map((phase) => {
    const reached = view.phases.includes(phase);
    return `<span class="step${reached ? " reached" : ""}">${phase}</span>`;
  }).join("<span class='arrow'>&rarr;</span>");
  const ending =
    terminal === "ROLLED_BACK" || terminal === "FAILED"
      ? `<div class="txn-ending ${stateCls}">${esc(terminal)}</div>`
      : "";
  const errors = view.errors.length
    ? `<ul class="txn-errors">${view.errors.map((e) => `<li>${esc(e)}</li>`).join("")}</ul>`
    : "";
  const directives = view.doc
    ? `<ul class="txn-directives">${view.doc.directives
        .map((d) => `<li>${esc(d.describe)} <em>${esc(d.status)}</em></li>`)
        .join("")}</ul>`
    : "";
  return `<div class="txn-card ${stateCls}" data-txn="${esc(view.txn_id)}">
    <div class="txn-head"><b>${esc(view.txn_id)}</b> on ${esc(view.device)}</div>
    <div class="txn-steps">${steps}</div>
    ${ending}${errors}${directives}
  </div>`;
}

export function renderTransactions(state: ConsoleState): string {
  const cards = transactionsNewestFirst(state).map(renderTxnCard).join("");
  return cards || `<p class="empty">No transactions yet.</p>`;
}

export function renderEvalReport(doc: EvalReportDoc): string {
  const functions = ["FAULT", "CONFIGURATION", "ACCOUNTING", "PERFORMANCE", "SECURITY"];
  const head = functions.map((f) => `<th>${f[0]}${f.slice(1, 4).toLowerCase()}</th>`).join("");
  const rows = doc.ranking
    .map((name, index) => {
      const row = doc.tools[name];
      const marks = functions
        .map((f) => `<td class="${row.coverage.includes(f) ? "covered" : "uncovered"}">
            ${row.coverage.includes(f) ? "&#10003;" : "&ndash;"}</td>`)
        .join("");
      const perF = functions
        .map((f) => `<td class="num">${(row.per_function[f] ?? 0).toFixed(2)}</td>`)
        .join("");
      return `<tr>
        <td class="rank">${index + 1}</td><td class="tool">${esc(name)}</td>
        ${marks}<td class="num">${(row.fcaps_score * 100).toFixed(0)}%</td>
        ${perF}<td class="num"><b>${row.aggregate.toFixed(3)}</b></td>
      </tr>`;
    })
    .join("");
  return `<table class="eval">
    <thead><tr><th>#</th><th>tool</th>${head}<th>rating</th>
      ${functions.map((f) => `<th>P(${f[0]})</th>`).join("")}<th>aggregate</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>
  <p class="eval-note">P(k) = Q(k)&middot;O(k)/C(k); coverage rated 20% per management function.</p>`;
}

export function renderConnection(state: ConsoleState): string {
  const labels = { live: "live", connecting: "connecting...", stale: "connection lost - retrying" };
  return `<span class="conn ${state.connection}">${labels[state.connection]}</span>`;
}
