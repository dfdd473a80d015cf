/**
 * DOM wiring for the three console screens: Entry, Review Queue, Report.
 *
 * All clinical rules live server-side; this file only renders controller
 * state and forwards events.
 */

import { ApiClient, CatalogEntryPayload, PatientPayload } from "./api.js";
import { EntrySession } from "./entry.js";
import { ReviewQueueController } from "./review.js";
import { ReportController } from "./report.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function text(value: string | null | undefined): string {
  return value ?? "";
}

function start(): void {
  const baseUrl = (el<HTMLInputElement>("base-url")).value;
  const token = (el<HTMLInputElement>("token")).value;
  const api = new ApiClient(baseUrl, token);
  const entry = new EntrySession(api);
  const queue = new ReviewQueueController(api);
  const report = new ReportController(api);

  let selectedPatient: PatientPayload | null = null;
  let selectedTest: CatalogEntryPayload | null = null;

  // --- tab switching -------------------------------------------------
  for (const tab of ["entry", "review", "report"]) {
    el<HTMLButtonElement>(`tab-${tab}`).addEventListener("click", () => {
      for (const other of ["entry", "review", "report"]) {
        el(`screen-${other}`).hidden = other !== tab;
      }
      if (tab === "review") {
        void queue.refresh().then(renderQueue);
      }
    });
  }

  // --- entry screen -----------------------------------------------------
  const patientResults = el<HTMLUListElement>("patient-results");
  el<HTMLInputElement>("patient-query").addEventListener("input", async (event) => {
    const query = (event.target as HTMLInputElement).value;
    const patients = query ? await api.searchPatients(query) : [];
    patientResults.replaceChildren(
      ...patients.map((patient) => {
        const item = document.createElement("li");
        item.textContent = `${patient.patient_uid} ${patient.full_name}`;
        item.addEventListener("click", () => {
          selectedPatient = patient;
          el("selected-patient").textContent =
            `${patient.patient_uid} ${patient.full_name}`;
        });
        return item;
      }),
    );
  });

  const testPicker = el<HTMLSelectElement>("test-picker");
  void api.listCatalog().then((entries) => {
    testPicker.replaceChildren(
      ...entries.map((catalogEntry) => {
        const option = document.createElement("option");
        option.value = String(catalogEntry.slno);
        option.textContent = `${catalogEntry.slno}. ${catalogEntry.test_name}`;
        return option;
      }),
    );
    testPicker.addEventListener("change", () => {
      selectedTest = entries.find((e) => String(e.slno) === testPicker.value) ?? null;
    });
    selectedTest = entries[0] ?? null;
  });

  const valueField = el<HTMLInputElement>("value-field");
  const renderHint = () => {
    const hint = el("range-hint");
    const badge = el("hint-badge");
    const retry = el<HTMLButtonElement>("hint-retry");
    retry.hidden = entry.hint.kind !== "unreachable";
    valueField.disabled = entry.inputDisabled;
    badge.textContent = "";
    switch (entry.hint.kind) {
      case "idle":
        hint.textContent = "";
        break;
      case "loading":
        hint.textContent = "…";
        break;
      case "unreachable":
        hint.textContent = entry.hint.message;
        break;
      case "ready":
        hint.textContent = entry.hint.text;
        if (entry.hint.unverified) {
          badge.textContent = "⚠ range not yet specialist-verified";
        }
        break;
    }
  };
  valueField.addEventListener("focus", () => {
    if (selectedTest) {
      void entry.focusTest(selectedTest.slno).then(renderHint);
      renderHint(); // show the loading state immediately
    }
  });
  el<HTMLButtonElement>("hint-retry").addEventListener("click", () => {
    void entry.retryHint().then(renderHint);
  });

  el<HTMLButtonElement>("submit-result").addEventListener("click", async () => {
    const banner = el("outcome-banner");
    if (!selectedPatient || !selectedTest) {
      banner.className = "banner error";
      banner.textContent = "select a patient and a test first";
      return;
    }
    if (!entry.canSubmit(valueField.value)) {
      banner.className = "banner error";
      banner.textContent = "value must not be empty";
      return;
    }
    const unit = el<HTMLInputElement>("unit-field").value.trim() || null;
    const outcome = await entry.submit(
      selectedPatient.patient_uid, selectedTest.slno, valueField.value, unit,
    );
    banner.textContent = outcome.message;
    banner.className = {
      accepted: "banner ok",
      violation: "banner flag",
      fieldError: "banner error",
      failure: "banner error",
    }[outcome.kind];
    if (outcome.kind === "accepted" || outcome.kind === "violation") {
      valueField.value = "";
    }
  });

  // --- review screen -------------------------------------------------------
  const renderQueue = () => {
    const tbody = el<HTMLTableSectionElement>("queue-body");
    tbody.replaceChildren(
      ...queue.entries.map((flagged) => {
        const row = document.createElement("tr");
        const cells = [
          flagged.entry_id,
          flagged.patient_uid,
          String(flagged.slno),
          `${flagged.value_verbatim}${flagged.unit ? " " + flagged.unit : ""}`,
          flagged.level1.range_display,
          flagged.level1.classification,
        ];
        for (const value of cells) {
          const cell = document.createElement("td");
          cell.textContent = value;
          row.appendChild(cell);
        }
        const actions = document.createElement("td");
        for (const action of ["override", "reject"] as const) {
          const button = document.createElement("button");
          button.textContent = action;
          button.addEventListener("click", () => {
            queue.openDialog(action, flagged.entry_id);
            renderDialog();
          });
          actions.appendChild(button);
        }
        row.appendChild(actions);
        return row;
      }),
    );
    el("queue-error").textContent = text(queue.error);
  };

  const renderDialog = () => {
    const dialog = el("review-dialog");
    dialog.hidden = queue.dialog === null;
    if (queue.dialog) {
      el("dialog-title").textContent =
        `${queue.dialog.action} ${queue.dialog.entryId} — reason required`;
      el<HTMLButtonElement>("dialog-confirm").disabled = !queue.confirmEnabled;
    }
  };
  el<HTMLTextAreaElement>("dialog-reason").addEventListener("input", (event) => {
    queue.setReason((event.target as HTMLTextAreaElement).value);
    renderDialog();
  });
  el<HTMLButtonElement>("dialog-confirm").addEventListener("click", async () => {
    await queue.confirm();
    el<HTMLTextAreaElement>("dialog-reason").value = "";
    renderDialog();
    renderQueue();
  });
  el<HTMLButtonElement>("dialog-cancel").addEventListener("click", () => {
    queue.closeDialog();
    renderDialog();
  });

  // --- report screen -----------------------------------------------------------
  const renderReport = () => {
    const table = el<HTMLTableSectionElement>("report-body");
    const current = report.report;
    el("report-meta").textContent = current
      ? `${current.report_id} [${current.status}] ${current.patient.patient_uid} ` +
        `${current.patient.full_name}`
      : "";
    table.replaceChildren(
      ...(current?.lines ?? []).map((line) => {
        const row = document.createElement("tr");
        const cells = [
          line.test_name,
          line.value_verbatim,
          text(line.unit),
          line.normal_range_display,
          text(line.flag),
          line.override_reason ? `overridden: ${line.override_reason}` : "",
        ];
        for (const value of cells) {
          const cell = document.createElement("td");
          cell.textContent = value;
          if (value === "UL" || value === "LL" || value === "UNIT") {
            cell.className = "flag";
          }
          row.appendChild(cell);
        }
        return row;
      }),
    );
    el<HTMLButtonElement>("sign-off").disabled = !report.canSignOff;
    el("report-error").textContent = text(report.error);
  };
  el<HTMLButtonElement>("build-report").addEventListener("click", async () => {
    await report.build(el<HTMLInputElement>("report-patient").value);
    renderReport();
  });
  el<HTMLButtonElement>("sign-off").addEventListener("click", async () => {
    await report.signOff();
    renderReport();
  });
}

el<HTMLButtonElement>("connect").addEventListener("click", () => {
  el("login").hidden = true;
  el("console").hidden = false;
  start();
});
