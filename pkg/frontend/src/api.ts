/** Thin typed client over the v1 HTTP API. */

import type {
  AlarmDoc,
  DirectiveInput,
  EvalReportDoc,
  MapDocument,
  ObjectDoc,
  TransactionDoc,
} from "./types.js";

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`);
    if (!response.ok) throw new Error(`${path}: HTTP ${response.status}`);
    return (await response.json()) as T;
  }

  map(): Promise<MapDocument> {
    return this.getJson("/api/v1/map");
  }

  async alarms(state?: string): Promise<AlarmDoc[]> {
    const suffix = state ? `?state=${encodeURIComponent(state)}` : "";
    const body = await this.getJson<{ alarms: AlarmDoc[] }>(`/api/v1/alarms${suffix}`);
    return body.alarms;
  }

  async objects(): Promise<ObjectDoc[]> {
    const body = await this.getJson<{ objects: ObjectDoc[] }>("/api/v1/objects");
    return body.objects;
  }

  transaction(txnId: string): Promise<TransactionDoc> {
    return this.getJson(`/api/v1/config/transactions/${encodeURIComponent(txnId)}`);
  }

  evalReport(): Promise<EvalReportDoc> {
    return this.getJson("/api/v1/eval/report");
  }

  async ack(alarmId: string, operatorId: string): Promise<AlarmDoc> {
    const response = await fetch(
      `${this.baseUrl}/api/v1/alarms/${encodeURIComponent(alarmId)}/ack`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ operator_id: operatorId }),
      },
    );
    if (!response.ok) throw new Error(`ack failed: HTTP ${response.status}`);
    return (await response.json()) as AlarmDoc;
  }

  async submitTransaction(
    device: string,
    operatorId: string,
    directives: DirectiveInput[],
  ): Promise<{ txn_id: string; errors?: string[] }> {
    const response = await fetch(
      `${this.baseUrl}/api/v1/config/${encodeURIComponent(device)}/transactions`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ operator_id: operatorId, directives }),
      },
    );
    const body = await response.json();
    if (!response.ok) {
      const problems: string[] = body.problems?.length ? body.problems : [body.error ?? "rejected"];
      throw new Error(problems.join("; "));
    }
    return body as { txn_id: string };
  }
}
