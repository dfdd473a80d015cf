/**
 * Report screen: draft preview with UL/LL/UNIT-marked lines and the
 * sign-off gate.
 *
 * The sign-off control stays disabled while the draft has a flagged line
 * or the review queue still holds a flagged entry for the report's
 * patient. The server is the authority: if a stale view forces the call
 * anyway, the 409 detail (UnresolvedViolations et al.) is surfaced.
 */

import { ApiClient, ApiError, ReportPayload, ServiceUnreachable } from "./api.js";

export class ReportController {
  report: ReportPayload | null = null;
  flaggedInQueueForPatient = 0;
  error: string | null = null;

  constructor(private readonly api: ApiClient) {}

  async build(patientUid: string): Promise<void> {
    try {
      this.report = await this.api.buildReport(patientUid);
      this.error = null;
    } catch (error) {
      this.report = null;
      this.error = describe(error);
      return;
    }
    await this.refreshQueueCount();
  }

  async refreshQueueCount(): Promise<void> {
    if (!this.report) {
      this.flaggedInQueueForPatient = 0;
      return;
    }
    const patientUid = this.report.patient.patient_uid;
    try {
      const queue = await this.api.reviewQueue();
      this.flaggedInQueueForPatient = queue.filter(
        (entry) => entry.patient_uid === patientUid,
      ).length;
    } catch (error) {
      this.error = describe(error);
    }
  }

  get hasFlaggedLine(): boolean {
    return this.report !== null &&
      this.report.lines.some((line) => line.entry_status === "Flagged");
  }

  /** Drives the disabled state of the sign-off button. */
  get canSignOff(): boolean {
    return this.report !== null &&
      this.report.status === "Draft" &&
      !this.hasFlaggedLine &&
      this.flaggedInQueueForPatient === 0;
  }

  /**
   * Request sign-off. Callable even when canSignOff is false (a stale
   * view may think otherwise); the server's refusal is surfaced.
   */
  async signOff(): Promise<void> {
    if (!this.report) {
      return;
    }
    try {
      this.report = await this.api.signOffReport(this.report.report_id);
      this.error = null;
    } catch (error) {
      this.error = describe(error);
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    return `${error.code}: ${error.detail}`;
  }
  if (error instanceof ServiceUnreachable) {
    return error.message;
  }
  return String(error);
}
