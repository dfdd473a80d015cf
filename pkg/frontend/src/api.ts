/**
 * Typed client for the labrepo HTTP API.
 *
 * The fetch implementation is injectable so controllers can be tested
 * without a network. Server errors always arrive as
 * `{ "error": <code>, "detail": <text> }` and are rethrown as ApiError.
 */

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface RangeSpecPayload {
  kind: "Closed" | "UpperBound" | "LowerBound" | "SingleValue" | "Qualitative";
  low?: string;
  high?: string;
  limit?: string;
  value?: string;
  unit?: string | null;
}

export interface VerificationPayload {
  specialist_id: string;
  at: string;
}

export interface RangeHint {
  slno: number;
  test_name: string;
  display_text: string;
  spec: RangeSpecPayload;
  verification: VerificationPayload | null;
  catalog_version: number;
}

export interface CatalogEntryPayload {
  slno: number;
  test_name: string;
  range_text: string;
  spec: RangeSpecPayload;
  verification: VerificationPayload | null;
  review_note: string | null;
}

export interface ValidationOutcomePayload {
  classification: "InRange" | "BelowLL" | "AboveUL" | "UnitMismatch" | "Indeterminate";
  range_display: string;
  catalog_version: number;
  level: number;
  at: string;
}

export interface EntryPayload {
  entry_id: string;
  patient_uid: string;
  slno: number;
  value_verbatim: string;
  value_decimal: string | null;
  unit: string | null;
  entered_by: string;
  entered_at: string;
  level1: ValidationOutcomePayload;
  catalog_version: number;
  status: "Accepted" | "Flagged" | "Overridden" | "Rejected" | "Finalized";
  override: { supervisor_id: string; reason: string; at: string } | null;
  rejection: { supervisor_id: string; reason: string; at: string } | null;
}

export interface PatientPayload {
  patient_uid: string;
  full_name: string;
  dob: string;
  stated_age_years: number;
  contact: string | null;
  registered_at: string;
}

export interface ReportLinePayload {
  entry_id: string;
  slno: number;
  test_name: string;
  value_verbatim: string;
  unit: string | null;
  normal_range_display: string;
  flag: "UL" | "LL" | "UNIT" | null;
  entry_status: string;
  override_reason: string | null;
}

export interface ReportPayload {
  report_id: string;
  patient: { patient_uid: string; full_name: string };
  lines: ReportLinePayload[];
  status: "Draft" | "SignedOff";
  built_at: string;
  signed_by: string | null;
  signed_at: string | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

/** Network-level failure (service unreachable), distinct from API errors. */
export class ServiceUnreachable extends Error {
  constructor(cause: unknown) {
    super(`service unreachable: ${String(cause)}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchLike: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchLike(`${this.baseUrl}${path}`, {
        method,
        headers: {
          Authorization: `Bearer ${this.token}`,
          ...(body === undefined ? {} : { "Content-Type": "application/json" }),
        },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (cause) {
      throw new ServiceUnreachable(cause);
    }
    if (!response.ok) {
      let code = "InternalError";
      let detail = response.statusText;
      try {
        const payload = (await response.json()) as { error?: string; detail?: string };
        code = payload.error ?? code;
        detail = payload.detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, detail);
    }
    return (await response.json()) as T;
  }

  getRangeHint(slno: number): Promise<RangeHint> {
    return this.request("GET", `/catalog/${slno}/range`);
  }

  listCatalog(filter?: string): Promise<CatalogEntryPayload[]> {
    const query = filter ? `?filter=${encodeURIComponent(filter)}` : "";
    return this.request("GET", `/catalog${query}`);
  }

  searchPatients(query: string): Promise<PatientPayload[]> {
    return this.request("GET", `/patients?query=${encodeURIComponent(query)}`);
  }

  submitResult(body: {
    patient_uid: string;
    slno: number;
    value: string;
    unit?: string | null;
  }): Promise<EntryPayload> {
    return this.request("POST", "/results", body);
  }

  reviewQueue(): Promise<EntryPayload[]> {
    return this.request("GET", "/review/queue");
  }

  overrideEntry(entryId: string, reason: string): Promise<EntryPayload> {
    return this.request("POST", `/results/${entryId}/override`, { reason });
  }

  rejectEntry(entryId: string, reason: string): Promise<EntryPayload> {
    return this.request("POST", `/results/${entryId}/reject`, { reason });
  }

  buildReport(patientUid: string): Promise<ReportPayload> {
    return this.request("POST", "/reports", { patient_uid: patientUid });
  }

  signOffReport(reportId: string): Promise<ReportPayload> {
    return this.request("POST", `/reports/${reportId}/signoff`);
  }
}
