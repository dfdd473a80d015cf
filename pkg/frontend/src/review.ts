/**
 * Supervisor review queue: flagged entries with override/reject dialogs.
 *
 * Both dialogs require a non-empty reason before their confirm control
 * enables — the client-side mirror of the server's EmptyReason rule. A
 * 409 from the server (another supervisor got there first) is surfaced
 * as a conflict message, never swallowed.
 */

import { ApiClient, ApiError, EntryPayload, ServiceUnreachable } from "./api.js";

export interface DialogState {
  action: "override" | "reject";
  entryId: string;
  reason: string;
}

export class ReviewQueueController {
  entries: EntryPayload[] = [];
  dialog: DialogState | null = null;
  error: string | null = null;

  constructor(private readonly api: ApiClient) {}

  async refresh(): Promise<void> {
    try {
      this.entries = await this.api.reviewQueue();
      this.error = null;
    } catch (error) {
      this.error = describe(error);
    }
  }

  openDialog(action: "override" | "reject", entryId: string): void {
    this.dialog = { action, entryId, reason: "" };
  }

  setReason(reason: string): void {
    if (this.dialog) {
      this.dialog.reason = reason;
    }
  }

  closeDialog(): void {
    this.dialog = null;
  }

  /** The dialog's confirm control is enabled only with a real reason. */
  get confirmEnabled(): boolean {
    return this.dialog !== null && this.dialog.reason.trim().length > 0;
  }

  /**
   * Apply the open dialog. Returns false (and does nothing) while the
   * confirm control is disabled.
   */
  async confirm(): Promise<boolean> {
    if (!this.dialog || !this.confirmEnabled) {
      return false;
    }
    const { action, entryId, reason } = this.dialog;
    let failure: string | null = null;
    try {
      if (action === "override") {
        await this.api.overrideEntry(entryId, reason);
      } else {
        await this.api.rejectEntry(entryId, reason);
      }
      this.dialog = null;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // somebody else resolved this entry; show the conflict and reload
        failure = `conflict: ${error.detail}`;
        this.dialog = null;
      } else {
        failure = describe(error);
      }
    }
    await this.refresh();
    if (failure) {
      this.error = failure; // must survive the successful refresh above
    }
    return true;
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
