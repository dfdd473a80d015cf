/**
 * Entry-screen session: test picker, live range hint and submission.
 *
 * The hint shown next to the value field must always belong to the test
 * whose field currently has focus. Every focus bumps a generation
 * counter; responses from earlier generations are discarded, and the
 * previous hint is cleared before the fetch starts so a stale range is
 * never visible while a new one loads.
 */

import { ApiClient, ApiError, EntryPayload, RangeHint, ServiceUnreachable } from "./api.js";

export type HintState =
  | { kind: "idle" }
  | { kind: "loading"; slno: number }
  | {
      kind: "ready";
      slno: number;
      text: string;
      qualitative: boolean;
      unverified: boolean;
      hint: RangeHint;
    }
  | { kind: "unreachable"; slno: number; message: string };

export type SubmissionOutcome =
  | { kind: "accepted"; entryId: string; classification: string; message: string }
  | { kind: "violation"; entryId: string; flag: "UL" | "LL" | "UNIT"; message: string }
  | { kind: "fieldError"; message: string }
  | { kind: "failure"; message: string };

export const QUALITATIVE_NOTICE = "no numeric range (qualitative)";

const FLAG_BY_CLASSIFICATION: Record<string, "UL" | "LL" | "UNIT"> = {
  AboveUL: "UL",
  BelowLL: "LL",
  UnitMismatch: "UNIT",
};

export class EntrySession {
  hint: HintState = { kind: "idle" };
  lastOutcome: SubmissionOutcome | null = null;
  private focusGeneration = 0;

  constructor(private readonly api: ApiClient) {}

  /** True while the value field should reject input (hint fetch failed). */
  get inputDisabled(): boolean {
    return this.hint.kind === "unreachable";
  }

  /** Called when a test's value field gains focus. */
  async focusTest(slno: number): Promise<void> {
    const generation = ++this.focusGeneration;
    this.hint = { kind: "loading", slno }; // stale hint cleared before fetch
    let result: HintState;
    try {
      const hint = await this.api.getRangeHint(slno);
      result = {
        kind: "ready",
        slno,
        text: hint.spec.kind === "Qualitative" ? QUALITATIVE_NOTICE : hint.display_text,
        qualitative: hint.spec.kind === "Qualitative",
        unverified: hint.verification === null,
        hint,
      };
    } catch (error) {
      if (error instanceof ServiceUnreachable) {
        result = { kind: "unreachable", slno, message: error.message };
      } else if (error instanceof ApiError) {
        result = { kind: "unreachable", slno, message: error.detail };
      } else {
        throw error;
      }
    }
    if (generation !== this.focusGeneration) {
      return; // a later focus superseded this fetch; discard the stale hint
    }
    this.hint = result;
  }

  /** Retry affordance for a failed hint fetch. */
  async retryHint(): Promise<void> {
    if (this.hint.kind === "unreachable" || this.hint.kind === "loading") {
      await this.focusTest(this.hint.slno);
    }
  }

  /** Client-side gate; the server re-validates everything regardless. */
  canSubmit(value: string): boolean {
    return value.trim().length > 0 && !this.inputDisabled;
  }

  async submit(
    patientUid: string,
    slno: number,
    value: string,
    unit: string | null,
  ): Promise<SubmissionOutcome> {
    if (!value.trim()) {
      this.lastOutcome = { kind: "fieldError", message: "value must not be empty" };
      return this.lastOutcome;
    }
    let entry: EntryPayload;
    try {
      entry = await this.api.submitResult({
        patient_uid: patientUid,
        slno,
        value,
        unit,
      });
    } catch (error) {
      if (error instanceof ApiError && error.code === "NonNumericValue") {
        this.lastOutcome = { kind: "fieldError", message: error.detail };
      } else if (error instanceof ApiError) {
        this.lastOutcome = { kind: "failure", message: `${error.code}: ${error.detail}` };
      } else if (error instanceof ServiceUnreachable) {
        this.lastOutcome = { kind: "failure", message: error.message };
      } else {
        throw error;
      }
      return this.lastOutcome;
    }
    if (entry.status === "Flagged") {
      const flag = FLAG_BY_CLASSIFICATION[entry.level1.classification] ?? "UNIT";
      this.lastOutcome = {
        kind: "violation",
        entryId: entry.entry_id,
        flag,
        message:
          `${flag}: ${entry.level1.classification} (normal ${entry.level1.range_display}); ` +
          "entry queued for supervisor review",
      };
    } else {
      this.lastOutcome = {
        kind: "accepted",
        entryId: entry.entry_id,
        classification: entry.level1.classification,
        message: entry.level1.range_display
          ? `accepted: ${entry.level1.classification} (normal ${entry.level1.range_display})`
          : `accepted: ${entry.level1.classification}`,
      };
    }
    return this.lastOutcome;
  }
}
