import type { EntryPayload, RangeHint, ReportPayload } from "../src/api.js";

export interface RecordedRequest {
  url: string;
  method: string;
  body: unknown;
}

export type Handler = (request: RecordedRequest) => Response | Promise<Response>;

/** Records every request and delegates to a swappable handler. */
export class FakeFetch {
  requests: RecordedRequest[] = [];

  constructor(public handler: Handler) {}

  fetch = (url: string, init?: RequestInit): Promise<Response> => {
    const request: RecordedRequest = {
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(init.body as string) : undefined,
    };
    this.requests.push(request);
    return Promise.resolve(this.handler(request));
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function errorResponse(status: number, code: string, detail: string): Response {
  return jsonResponse({ error: code, detail }, status);
}

export function deferred<T>(): { promise: Promise<T>; resolve: (value: T) => void } {
  let resolve!: (value: T) => void;
  const promise = new Promise<T>((r) => {
    resolve = r;
  });
  return { promise, resolve };
}

export function rangeHint(overrides: Partial<RangeHint> = {}): RangeHint {
  return {
    slno: 1,
    test_name: "PlasmaGlucoseF",
    display_text: "60-110 mg/dl",
    spec: { kind: "Closed", low: "60", high: "110", unit: "mg/dl" },
    verification: { specialist_id: "DR-01", at: "2025-01-01T00:00:00+00:00" },
    catalog_version: 1,
    ...overrides,
  };
}

export function entryPayload(overrides: Partial<EntryPayload> = {}): EntryPayload {
  return {
    entry_id: "E-000001",
    patient_uid: "P-0001",
    slno: 1,
    value_verbatim: "100",
    value_decimal: "100",
    unit: "mg/dl",
    entered_by: "op1",
    entered_at: "2025-01-01T00:05:00+00:00",
    level1: {
      classification: "InRange",
      range_display: "60-110 mg/dl",
      catalog_version: 1,
      level: 1,
      at: "2025-01-01T00:05:00+00:00",
    },
    catalog_version: 1,
    status: "Accepted",
    override: null,
    rejection: null,
    ...overrides,
  };
}

export function flaggedEntry(overrides: Partial<EntryPayload> = {}): EntryPayload {
  return entryPayload({
    entry_id: "E-000002",
    slno: 6,
    value_verbatim: "6.2",
    value_decimal: "6.2",
    unit: "mEq/L",
    level1: {
      classification: "AboveUL",
      range_display: "3.8-5.6 mEq/L",
      catalog_version: 1,
      level: 1,
      at: "2025-01-01T00:06:00+00:00",
    },
    status: "Flagged",
    ...overrides,
  });
}

export function reportPayload(overrides: Partial<ReportPayload> = {}): ReportPayload {
  return {
    report_id: "R-000001",
    patient: { patient_uid: "P-0001", full_name: "John Smith" },
    lines: [
      {
        entry_id: "E-000001",
        slno: 1,
        test_name: "PlasmaGlucoseF",
        value_verbatim: "100",
        unit: "mg/dl",
        normal_range_display: "60-110 mg/dl",
        flag: null,
        entry_status: "Accepted",
        override_reason: null,
      },
    ],
    status: "Draft",
    built_at: "2025-01-01T00:10:00+00:00",
    signed_by: null,
    signed_at: null,
    ...overrides,
  };
}
