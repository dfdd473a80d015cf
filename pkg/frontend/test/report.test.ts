import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ReportController } from "../src/report.js";
import {
  FakeFetch,
  errorResponse,
  flaggedEntry,
  jsonResponse,
  reportPayload,
} from "./helpers.js";

function controller(fake: FakeFetch): ReportController {
  return new ReportController(new ApiClient("http://svc", "tok", fake.fetch));
}

function routes(queue: unknown, report: unknown) {
  return new FakeFetch((request) => {
    if (request.url.endsWith("/review/queue")) {
      return jsonResponse(queue);
    }
    if (request.url.endsWith("/reports")) {
      return jsonResponse(report);
    }
    throw new Error(`unrouted ${request.url}`);
  });
}

describe("report screen", () => {
  it("sign-off stays disabled while the queue holds a flagged entry for the patient", async () => {
    const fake = routes([flaggedEntry()], reportPayload());
    const report = controller(fake);
    await report.build("P-0001");
    expect(report.flaggedInQueueForPatient).toBe(1);
    expect(report.canSignOff).toBe(false);
  });

  it("a flagged entry for a different patient does not block sign-off", async () => {
    const fake = routes([flaggedEntry({ patient_uid: "P-0002" })], reportPayload());
    const report = controller(fake);
    await report.build("P-0001");
    expect(report.flaggedInQueueForPatient).toBe(0);
    expect(report.canSignOff).toBe(true);
  });

  it("sign-off stays disabled while a draft line is itself Flagged", async () => {
    const draft = reportPayload({
      lines: [
        ...reportPayload().lines,
        {
          entry_id: "E-000002",
          slno: 6,
          test_name: "SerumPotassium",
          value_verbatim: "6.2",
          unit: "mEq/L",
          normal_range_display: "3.8-5.6 mEq/L",
          flag: "UL",
          entry_status: "Flagged",
          override_reason: null,
        },
      ],
    });
    const fake = routes([], draft);
    const report = controller(fake);
    await report.build("P-0001");
    expect(report.hasFlaggedLine).toBe(true);
    expect(report.canSignOff).toBe(false);
  });

  it("signs off a clean draft and reflects the new status", async () => {
    const fake = new FakeFetch((request) => {
      if (request.url.endsWith("/review/queue")) {
        return jsonResponse([]);
      }
      if (request.url.endsWith("/signoff")) {
        return jsonResponse(reportPayload({
          status: "SignedOff", signed_by: "sup1",
          signed_at: "2025-01-01T01:00:00+00:00",
        }));
      }
      return jsonResponse(reportPayload());
    });
    const report = controller(fake);
    await report.build("P-0001");
    expect(report.canSignOff).toBe(true);
    await report.signOff();
    expect(report.report?.status).toBe("SignedOff");
    expect(report.error).toBeNull();
    expect(report.canSignOff).toBe(false); // already signed
  });

  it("surfaces the UnresolvedViolations detail when a stale view forces sign-off", async () => {
    const fake = new FakeFetch((request) => {
      if (request.url.endsWith("/review/queue")) {
        return jsonResponse([]); // the view believes the queue is clear
      }
      if (request.url.endsWith("/signoff")) {
        return errorResponse(409, "UnresolvedViolations",
          "cannot sign off; unresolved range violations on: E-000002");
      }
      return jsonResponse(reportPayload());
    });
    const report = controller(fake);
    await report.build("P-0001");
    await report.signOff(); // forced despite the server's state having moved
    expect(report.error).toContain("UnresolvedViolations");
    expect(report.error).toContain("E-000002");
    expect(report.report?.status).toBe("Draft");
  });

  it("keeps build errors visible (unknown patient)", async () => {
    const fake = new FakeFetch(() =>
      errorResponse(404, "UnknownPatient", "no patient registered with uid 'P-0404'"));
    const report = controller(fake);
    await report.build("P-0404");
    expect(report.report).toBeNull();
    expect(report.error).toContain("UnknownPatient");
    expect(report.canSignOff).toBe(false);
  });
});
