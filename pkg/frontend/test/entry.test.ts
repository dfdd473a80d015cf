import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { EntrySession, QUALITATIVE_NOTICE } from "../src/entry.js";
import {
  FakeFetch,
  deferred,
  entryPayload,
  errorResponse,
  flaggedEntry,
  jsonResponse,
  rangeHint,
} from "./helpers.js";

function session(fake: FakeFetch): EntrySession {
  return new EntrySession(new ApiClient("http://svc", "tok", fake.fetch));
}

describe("range hint", () => {
  it("focusing the PlasmaGlucoseF field fetches /catalog/1/range and shows its text", async () => {
    const fake = new FakeFetch(() => jsonResponse(rangeHint()));
    const entry = session(fake);
    await entry.focusTest(1);
    expect(fake.requests).toHaveLength(1);
    expect(fake.requests[0].url).toBe("http://svc/catalog/1/range");
    expect(fake.requests[0].method).toBe("GET");
    expect(entry.hint).toMatchObject({ kind: "ready", text: "60-110 mg/dl" });
  });

  it("clears the previous hint before fetching a new one", async () => {
    const gate = deferred<Response>();
    const fake = new FakeFetch(() => gate.promise);
    const entry = session(fake);
    const pending = entry.focusTest(1);
    expect(entry.hint).toEqual({ kind: "loading", slno: 1 });
    gate.resolve(jsonResponse(rangeHint()));
    await pending;
    expect(entry.hint.kind).toBe("ready");
  });

  it("shows the qualitative notice when the test has no numeric range", async () => {
    const hint = rangeHint({
      slno: 28,
      test_name: "Trop_ITC",
      display_text: "",
      spec: { kind: "Qualitative" },
    });
    const fake = new FakeFetch(() => jsonResponse(hint));
    const entry = session(fake);
    await entry.focusTest(28);
    expect(entry.hint).toMatchObject({
      kind: "ready",
      text: QUALITATIVE_NOTICE,
      qualitative: true,
    });
  });

  it("marks an unverified range so the badge can warn", async () => {
    const fake = new FakeFetch(() => jsonResponse(rangeHint({ verification: null })));
    const entry = session(fake);
    await entry.focusTest(1);
    expect(entry.hint).toMatchObject({ kind: "ready", unverified: true });
  });

  it("discards a stale response when focus moved on (final hint matches final focus)", async () => {
    const first = deferred<Response>();
    const second = deferred<Response>();
    const gates = [first, second];
    const fake = new FakeFetch(() => gates.shift()!.promise);
    const entry = session(fake);

    const focusOne = entry.focusTest(1);
    const focusSix = entry.focusTest(6);
    // the older request resolves *after* the newer one
    second.resolve(jsonResponse(rangeHint({
      slno: 6, test_name: "SerumPotassium", display_text: "3.8-5.6 mEq/L",
      spec: { kind: "Closed", low: "3.8", high: "5.6", unit: "mEq/L" },
    })));
    await focusSix;
    first.resolve(jsonResponse(rangeHint()));
    await focusOne;

    expect(entry.hint).toMatchObject({ kind: "ready", slno: 6, text: "3.8-5.6 mEq/L" });
  });

  it("disables input and offers retry when the service is unreachable", async () => {
    let reachable = false;
    const fake = new FakeFetch(() => {
      if (!reachable) {
        throw new TypeError("fetch failed");
      }
      return jsonResponse(rangeHint());
    });
    const entry = session(fake);
    await entry.focusTest(1).catch(() => undefined);
    expect(entry.hint.kind).toBe("unreachable");
    expect(entry.inputDisabled).toBe(true);
    expect(entry.canSubmit("100")).toBe(false);

    reachable = true;
    await entry.retryHint();
    expect(entry.hint.kind).toBe("ready");
    expect(entry.inputDisabled).toBe(false);
  });
});

describe("submission", () => {
  it("reports an in-range submission as accepted", async () => {
    const fake = new FakeFetch(() => jsonResponse(entryPayload()));
    const entry = session(fake);
    const outcome = await entry.submit("P-0001", 1, "100", "mg/dl");
    expect(outcome).toMatchObject({ kind: "accepted", classification: "InRange" });
    expect(fake.requests[0]).toMatchObject({
      url: "http://svc/results",
      method: "POST",
      body: { patient_uid: "P-0001", slno: 1, value: "100", unit: "mg/dl" },
    });
  });

  it("turns a flagged submission into a prominent UL banner", async () => {
    const fake = new FakeFetch(() => jsonResponse(flaggedEntry()));
    const entry = session(fake);
    const outcome = await entry.submit("P-0001", 6, "6.2", "mEq/L");
    expect(outcome).toMatchObject({ kind: "violation", flag: "UL" });
    expect((outcome as { message: string }).message).toContain("supervisor review");
  });

  it("maps NonNumericValue to a field-level error", async () => {
    const fake = new FakeFetch(() =>
      errorResponse(422, "NonNumericValue", "value 'abc' is not numeric"));
    const entry = session(fake);
    const outcome = await entry.submit("P-0001", 1, "abc", null);
    expect(outcome.kind).toBe("fieldError");
  });

  it("rejects an empty value client-side without calling the service", async () => {
    const fake = new FakeFetch(() => jsonResponse(entryPayload()));
    const entry = session(fake);
    const outcome = await entry.submit("P-0001", 1, "   ", null);
    expect(outcome.kind).toBe("fieldError");
    expect(fake.requests).toHaveLength(0);
  });

  it("surfaces other API errors as failures, not crashes", async () => {
    const fake = new FakeFetch(() =>
      errorResponse(404, "UnknownPatient", "no patient registered"));
    const entry = session(fake);
    const outcome = await entry.submit("P-0404", 1, "100", null);
    expect(outcome).toMatchObject({ kind: "failure" });
    expect((outcome as { message: string }).message).toContain("UnknownPatient");
  });
});
