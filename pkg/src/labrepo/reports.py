"""Patient report assembly, UL/LL flagging and rendering.

Reports are Draft until a supervisor signs off.  Drafts are cheap and
regenerable; a signed-off report is immutable and its entries are
finalized with it.  A violation appears on the report as a distinct flag:
UL above the upper limit, LL below the lower limit, UNIT for a unit
mismatch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime

from .ranges import Classification

FLAG_BY_CLASSIFICATION = {
    Classification.ABOVE_UL: "UL",
    Classification.BELOW_LL: "LL",
    Classification.UNIT_MISMATCH: "UNIT",
    Classification.IN_RANGE: None,
    Classification.INDETERMINATE: None,
}

_TEXT_COLUMNS = ["Test Name", "Result", "Unit", "Normal Range", "Flag"]


@dataclass(frozen=True)
class ReportLine:
    entry_id: str
    slno: int
    test_name: str
    value_verbatim: str
    unit: str | None
    normal_range_display: str
    flag: str | None
    entry_status: str
    override_reason: str | None = None


@dataclass(frozen=True)
class OverrideNote:
    """Override attribution carried on the report for audit display."""

    entry_id: str
    supervisor_id: str
    reason: str
    at: datetime


@dataclass
class Report:
    report_id: str
    patient: dict
    lines: list[ReportLine]
    overrides: list[OverrideNote]
    status: str  # "Draft" | "SignedOff"
    built_at: datetime
    signed_by: str | None = None
    signed_at: datetime | None = None


def line_payload(line: ReportLine) -> dict:
    return {
        "entry_id": line.entry_id,
        "slno": line.slno,
        "test_name": line.test_name,
        "value_verbatim": line.value_verbatim,
        "unit": line.unit,
        "normal_range_display": line.normal_range_display,
        "flag": line.flag,
        "entry_status": line.entry_status,
        "override_reason": line.override_reason,
    }


def line_from_payload(data: dict) -> ReportLine:
    return ReportLine(
        entry_id=data["entry_id"],
        slno=data["slno"],
        test_name=data["test_name"],
        value_verbatim=data["value_verbatim"],
        unit=data["unit"],
        normal_range_display=data["normal_range_display"],
        flag=data["flag"],
        entry_status=data["entry_status"],
        override_reason=data["override_reason"],
    )


def override_note_payload(note: OverrideNote) -> dict:
    return {
        "entry_id": note.entry_id,
        "supervisor_id": note.supervisor_id,
        "reason": note.reason,
        "at": note.at.isoformat(),
    }


def report_payload(report: Report) -> dict:
    return {
        "report_id": report.report_id,
        "patient": dict(report.patient),
        "lines": [line_payload(line) for line in report.lines],
        "overrides": [override_note_payload(n) for n in report.overrides],
        "status": report.status,
        "built_at": report.built_at.isoformat(),
        "signed_by": report.signed_by,
        "signed_at": report.signed_at.isoformat() if report.signed_at else None,
    }


def report_from_payload(data: dict) -> Report:
    return Report(
        report_id=data["report_id"],
        patient=dict(data["patient"]),
        lines=[line_from_payload(l) for l in data["lines"]],
        overrides=[
            OverrideNote(
                entry_id=n["entry_id"],
                supervisor_id=n["supervisor_id"],
                reason=n["reason"],
                at=datetime.fromisoformat(n["at"]),
            )
            for n in data["overrides"]
        ],
        status=data["status"],
        built_at=datetime.fromisoformat(data["built_at"]),
        signed_by=data["signed_by"],
        signed_at=datetime.fromisoformat(data["signed_at"]) if data["signed_at"] else None,
    )


def render_structured(report: Report) -> bytes:
    """Self-describing JSON serialization of the full report."""
    return json.dumps(report_payload(report), ensure_ascii=False, indent=2).encode("utf-8")


def parse_structured(blob: bytes) -> Report:
    return report_from_payload(json.loads(blob.decode("utf-8")))


def render_text(report: Report) -> bytes:
    """Fixed-width table; every cell padded to its column's widest value.

    Overridden lines append the override reason after the flag column so
    the supervisor sees why an out-of-range value was let through.
    """
    head = [
        f"Patient: {report.patient.get('patient_uid', '')}  {report.patient.get('full_name', '')}".rstrip(),
        f"Report:  {report.report_id}  [{_status_label(report)}]",
        f"Built:   {report.built_at.isoformat()}",
        "",
    ]
    cells = [
        [
            line.test_name,
            line.value_verbatim,
            line.unit or "",
            line.normal_range_display,
            line.flag or "",
        ]
        for line in report.lines
    ]
    widths = [
        max(len(_TEXT_COLUMNS[i]), *(len(row[i]) for row in cells)) if cells else len(_TEXT_COLUMNS[i])
        for i in range(len(_TEXT_COLUMNS))
    ]
    rows = [_pad_row(_TEXT_COLUMNS, widths)]
    for line, row in zip(report.lines, cells):
        text = _pad_row(row, widths)
        if line.override_reason:
            text = f"{text}  overridden: {line.override_reason}"
        rows.append(text)
    return ("\n".join(head + rows) + "\n").encode("utf-8")


def _status_label(report: Report) -> str:
    if report.status == "SignedOff":
        return f"SignedOff by {report.signed_by} at {report.signed_at.isoformat()}"
    return "Draft"


def _pad_row(row: list[str], widths: list[int]) -> str:
    return "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()
