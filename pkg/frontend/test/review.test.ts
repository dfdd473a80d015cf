import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ReviewQueueController } from "../src/review.js";
import {
  FakeFetch,
  RecordedRequest,
  errorResponse,
  flaggedEntry,
  jsonResponse,
} from "./helpers.js";

function controller(fake: FakeFetch): ReviewQueueController {
  return new ReviewQueueController(new ApiClient("http://svc", "tok", fake.fetch));
}

describe("review queue", () => {
  it("lists flagged entries with value, range and flag", async () => {
    const fake = new FakeFetch(() => jsonResponse([flaggedEntry()]));
    const queue = controller(fake);
    await queue.refresh();
    expect(queue.entries).toHaveLength(1);
    expect(queue.entries[0]).toMatchObject({
      entry_id: "E-000002",
      value_verbatim: "6.2",
      level1: { classification: "AboveUL", range_display: "3.8-5.6 mEq/L" },
    });
  });

  it("keeps the confirm control disabled until a non-blank reason is typed", () => {
    const fake = new FakeFetch(() => jsonResponse([]));
    const queue = controller(fake);
    queue.openDialog("override", "E-000002");
    expect(queue.confirmEnabled).toBe(false);
    queue.setReason("   ");
    expect(queue.confirmEnabled).toBe(false);
    queue.setReason("rechecked specimen");
    expect(queue.confirmEnabled).toBe(true);
  });

  it("does nothing when confirm is pressed while disabled", async () => {
    const fake = new FakeFetch(() => jsonResponse([]));
    const queue = controller(fake);
    queue.openDialog("override", "E-000002");
    expect(await queue.confirm()).toBe(false);
    expect(fake.requests).toHaveLength(0);
    expect(queue.dialog).not.toBeNull();
  });

  it("posts the override with its reason and refreshes the queue", async () => {
    const fake = new FakeFetch((request: RecordedRequest) => {
      if (request.url.endsWith("/override")) {
        return jsonResponse(flaggedEntry({ status: "Overridden" }));
      }
      return jsonResponse([]);
    });
    const queue = controller(fake);
    queue.openDialog("override", "E-000002");
    queue.setReason("rechecked specimen");
    await queue.confirm();
    expect(fake.requests[0]).toMatchObject({
      url: "http://svc/results/E-000002/override",
      method: "POST",
      body: { reason: "rechecked specimen" },
    });
    expect(queue.dialog).toBeNull();
    expect(queue.error).toBeNull();
    expect(queue.entries).toEqual([]);
  });

  it("posts a reject through its own dialog", async () => {
    const fake = new FakeFetch((request) =>
      request.url.endsWith("/reject")
        ? jsonResponse(flaggedEntry({ status: "Rejected" }))
        : jsonResponse([]));
    const queue = controller(fake);
    queue.openDialog("reject", "E-000002");
    queue.setReason("hemolyzed specimen");
    await queue.confirm();
    expect(fake.requests[0].url).toBe("http://svc/results/E-000002/reject");
  });

  it("surfaces a 409 when another supervisor acted first", async () => {
    const fake = new FakeFetch((request) =>
      request.url.endsWith("/override")
        ? errorResponse(409, "NotFlagged", "entry E-000002 is Overridden, not Flagged")
        : jsonResponse([]));
    const queue = controller(fake);
    queue.openDialog("override", "E-000002");
    queue.setReason("me too");
    await queue.confirm();
    expect(queue.error).toContain("conflict:");
    expect(queue.error).toContain("E-000002");
    expect(queue.dialog).toBeNull();
  });
});
