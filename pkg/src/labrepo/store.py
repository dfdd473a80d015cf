"""Durable, audited repository of result entries and their lifecycle.

The append-only event log is the source of truth: every successful
mutation writes one or more self-describing records, and replaying the log
from empty reproduces the current state exactly.  Records are
length-prefixed JSON with an explicit format version.

Lifecycle of an entry::

    Accepted  -> Finalized                 (in-range / indeterminate)
    Flagged   -> Overridden -> Finalized   (supervised override, four-eyes)
    Flagged   -> Rejected                  (terminal; excluded from reports)

Draft reports are transient and rebuildable; only sign-off creates durable
state, so the log carries the full signed report snapshot.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass
from datetime import date, datetime, timezone
from decimal import Decimal
from enum import Enum
from pathlib import Path

from . import clock as clock_module
from .catalog import Catalog, CatalogEntry, ImportReport
from .errors import (
    AlreadySignedOff,
    EmptyReason,
    NotFlagged,
    SelfOverride,
    StoreInconsistent,
    UnknownEntry,
    UnknownPatient,
    UnknownReport,
    UnresolvedViolations,
    UnverifiedCatalogEntries,
)
from .patients import DEFAULT_UID_PATTERN, Patient, PatientRegistry
from .ranges import Classification, Qualitative
from .reports import (
    FLAG_BY_CLASSIFICATION,
    OverrideNote,
    Report,
    ReportLine,
    render_structured,
    render_text,
    report_from_payload,
    report_payload,
)
from .validation import (
    RecheckResult,
    ValidationOutcome,
    level1_check,
    level2_recheck,
    parse_decimal_value,
)

LOG_FORMAT_VERSION = 1

VIOLATIONS = {
    Classification.BELOW_LL,
    Classification.ABOVE_UL,
    Classification.UNIT_MISMATCH,
}


class EntryStatus(str, Enum):
    ACCEPTED = "Accepted"
    FLAGGED = "Flagged"
    OVERRIDDEN = "Overridden"
    REJECTED = "Rejected"
    FINALIZED = "Finalized"


class AuditAction(str, Enum):
    SUBMITTED = "Submitted"
    OVERRIDDEN = "Overridden"
    REJECTED = "Rejected"
    FINALIZED = "Finalized"
    CATALOG_IMPORTED = "CatalogImported"
    CATALOG_VERIFIED = "CatalogVerified"
    PATIENT_REGISTERED = "PatientRegistered"
    SIGNED_OFF = "SignedOff"


@dataclass(frozen=True)
class AuditEvent:
    sequence_no: int
    at: datetime
    actor: str
    action: AuditAction
    payload: dict


@dataclass
class OverrideRecord:
    entry_id: str
    supervisor_id: str
    reason: str
    at: datetime


@dataclass
class RejectionRecord:
    entry_id: str
    supervisor_id: str
    reason: str
    at: datetime


@dataclass
class ResultEntry:
    entry_id: str
    patient_uid: str
    slno: int
    value_verbatim: str
    value_decimal: Decimal | None
    unit: str | None
    entered_by: str
    entered_at: datetime
    level1: ValidationOutcome
    catalog_version: int
    status: EntryStatus
    override: OverrideRecord | None = None
    rejection: RejectionRecord | None = None


# --------------------------------------------------------------------------
# Event log encoding: "<byte length>\n<json record>\n"
# --------------------------------------------------------------------------

def encode_event(event: AuditEvent) -> bytes:
    record = {
        "format_version": LOG_FORMAT_VERSION,
        "sequence_no": event.sequence_no,
        "at": event.at.isoformat(),
        "actor": event.actor,
        "action": event.action.value,
        "payload": event.payload,
    }
    body = json.dumps(record, ensure_ascii=False).encode("utf-8")
    return b"%d\n%s\n" % (len(body), body)


def decode_events(blob: bytes) -> list[AuditEvent]:
    events = []
    pos = 0
    while pos < len(blob):
        newline = blob.find(b"\n", pos)
        if newline < 0:
            raise StoreInconsistent("truncated event log: missing length prefix")
        try:
            length = int(blob[pos:newline])
        except ValueError as exc:
            raise StoreInconsistent("corrupt event log: bad length prefix") from exc
        start = newline + 1
        end = start + length
        if end + 1 > len(blob) or blob[end:end + 1] != b"\n":
            raise StoreInconsistent("truncated event log: incomplete record")
        try:
            record = json.loads(blob[start:end].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise StoreInconsistent("corrupt event log: unreadable record") from exc
        if record.get("format_version") != LOG_FORMAT_VERSION:
            raise StoreInconsistent(
                f"unsupported log format version {record.get('format_version')!r}"
            )
        events.append(AuditEvent(
            sequence_no=record["sequence_no"],
            at=datetime.fromisoformat(record["at"]),
            actor=record["actor"],
            action=AuditAction(record["action"]),
            payload=record["payload"],
        ))
        pos = end + 1
    return events


# --------------------------------------------------------------------------
# Payload helpers (events, API responses and the state digest share these)
# --------------------------------------------------------------------------

def outcome_payload(outcome: ValidationOutcome) -> dict:
    return {
        "classification": outcome.classification.value,
        "range_display": outcome.range_display,
        "catalog_version": outcome.catalog_version,
        "level": outcome.level,
        "at": outcome.at.isoformat(),
    }


def outcome_from_payload(data: dict) -> ValidationOutcome:
    return ValidationOutcome(
        classification=Classification(data["classification"]),
        range_display=data["range_display"],
        catalog_version=data["catalog_version"],
        level=data["level"],
        at=datetime.fromisoformat(data["at"]),
    )


def entry_payload(entry: ResultEntry) -> dict:
    return {
        "entry_id": entry.entry_id,
        "patient_uid": entry.patient_uid,
        "slno": entry.slno,
        "value_verbatim": entry.value_verbatim,
        "value_decimal": str(entry.value_decimal) if entry.value_decimal is not None else None,
        "unit": entry.unit,
        "entered_by": entry.entered_by,
        "entered_at": entry.entered_at.isoformat(),
        "level1": outcome_payload(entry.level1),
        "catalog_version": entry.catalog_version,
        "status": entry.status.value,
        "override": _record_payload(entry.override),
        "rejection": _record_payload(entry.rejection),
    }


def _record_payload(record: OverrideRecord | RejectionRecord | None) -> dict | None:
    if record is None:
        return None
    return {
        "entry_id": record.entry_id,
        "supervisor_id": record.supervisor_id,
        "reason": record.reason,
        "at": record.at.isoformat(),
    }


def entry_from_payload(data: dict) -> ResultEntry:
    override = data.get("override")
    rejection = data.get("rejection")
    return ResultEntry(
        entry_id=data["entry_id"],
        patient_uid=data["patient_uid"],
        slno=data["slno"],
        value_verbatim=data["value_verbatim"],
        value_decimal=Decimal(data["value_decimal"]) if data["value_decimal"] is not None else None,
        unit=data["unit"],
        entered_by=data["entered_by"],
        entered_at=datetime.fromisoformat(data["entered_at"]),
        level1=outcome_from_payload(data["level1"]),
        catalog_version=data["catalog_version"],
        status=EntryStatus(data["status"]),
        override=OverrideRecord(**_parse_record(override)) if override else None,
        rejection=RejectionRecord(**_parse_record(rejection)) if rejection else None,
    )


def _parse_record(data: dict) -> dict:
    return {
        "entry_id": data["entry_id"],
        "supervisor_id": data["supervisor_id"],
        "reason": data["reason"],
        "at": datetime.fromisoformat(data["at"]),
    }


def patient_payload(patient: Patient) -> dict:
    return {
        "patient_uid": patient.patient_uid,
        "full_name": patient.full_name,
        "dob": patient.dob.isoformat(),
        "stated_age_years": patient.stated_age_years,
        "contact": patient.contact,
        "registered_at": patient.registered_at.isoformat(),
    }


def patient_from_payload(data: dict) -> Patient:
    return Patient(
        patient_uid=data["patient_uid"],
        full_name=data["full_name"],
        dob=date.fromisoformat(data["dob"]),
        stated_age_years=data["stated_age_years"],
        contact=data["contact"],
        registered_at=datetime.fromisoformat(data["registered_at"]),
    )


def event_record(event: AuditEvent) -> dict:
    return {
        "sequence_no": event.sequence_no,
        "at": event.at.isoformat(),
        "actor": event.actor,
        "action": event.action.value,
        "payload": event.payload,
    }


_ENTRY_ID_RE = re.compile(r"^E-(\d+)$")
_REPORT_ID_RE = re.compile(r"^R-(\d+)$")


class Repository:
    """Single-writer, multi-reader store for the whole workflow.

    All mutations are serialized through one lock and recorded in the
    event log before being applied, so readers always observe a state
    that the log can reproduce.
    """

    def __init__(self, store_path: str | Path | None = None,
                 uid_pattern: str = DEFAULT_UID_PATTERN, clock=None) -> None:
        self._lock = threading.RLock()
        self._clock = clock
        self._uid_pattern = uid_pattern
        self.catalog = Catalog()
        self.patients = PatientRegistry(uid_pattern)
        self._entries: dict[str, ResultEntry] = {}
        self._drafts: dict[str, Report] = {}
        self._signed: dict[str, Report] = {}
        self._audit: list[AuditEvent] = []
        self._entry_seq = 0
        self._report_seq = 0
        self._log_path: Path | None = None
        self._log_file = None
        self._drafts_path: Path | None = None
        if store_path is not None:
            root = Path(store_path)
            root.mkdir(parents=True, exist_ok=True)
            self._log_path = root / "events.log"
            if self._log_path.exists():
                for event in decode_events(self._log_path.read_bytes()):
                    self._apply(event)
            self._log_file = open(self._log_path, "ab")
            # Drafts are a rebuildable cache, kept in a sidecar (never in the
            # event log) so separate CLI invocations can build then sign.
            self._drafts_path = root / "drafts.json"
            self._load_draft_cache()

    # -- plumbing ---------------------------------------------------------

    def _now(self) -> datetime:
        return self._clock() if self._clock is not None else clock_module.now()

    def _commit(self, at: datetime, actor: str,
                spec: list[tuple[AuditAction, dict]]) -> list[AuditEvent]:
        """Append one event per (action, payload) pair, then apply them."""
        events = [
            AuditEvent(
                sequence_no=len(self._audit) + offset + 1,
                at=at,
                actor=actor,
                action=action,
                payload=payload,
            )
            for offset, (action, payload) in enumerate(spec)
        ]
        if self._log_file is not None:
            self._log_file.write(b"".join(encode_event(e) for e in events))
            self._log_file.flush()
        for event in events:
            self._apply(event)
        return events

    def _apply(self, event: AuditEvent) -> None:
        """Pure state transition driven by event payloads only.

        Used identically for live commits and for replay from the log, so
        it must never consult the clock or generate fresh identifiers.
        """
        expected = len(self._audit) + 1
        if event.sequence_no != expected:
            raise StoreInconsistent(
                f"audit gap: expected sequence {expected}, got {event.sequence_no}"
            )
        self._audit.append(event)
        action, payload = event.action, event.payload
        if action is AuditAction.CATALOG_IMPORTED:
            self.catalog.apply_import(payload["rows"])
        elif action is AuditAction.CATALOG_VERIFIED:
            self.catalog.apply_verify(
                payload["slno"], payload["specialist_id"],
                datetime.fromisoformat(payload["at"]),
            )
        elif action is AuditAction.PATIENT_REGISTERED:
            self.patients.apply_add(patient_from_payload(payload))
        elif action is AuditAction.SUBMITTED:
            entry = entry_from_payload(payload)
            self._entries[entry.entry_id] = entry
            match = _ENTRY_ID_RE.match(entry.entry_id)
            if match:
                self._entry_seq = max(self._entry_seq, int(match.group(1)))
        elif action is AuditAction.OVERRIDDEN:
            entry = self._entries[payload["entry_id"]]
            entry.status = EntryStatus.OVERRIDDEN
            entry.override = OverrideRecord(**_parse_record(payload))
        elif action is AuditAction.REJECTED:
            entry = self._entries[payload["entry_id"]]
            entry.status = EntryStatus.REJECTED
            entry.rejection = RejectionRecord(**_parse_record(payload))
        elif action is AuditAction.FINALIZED:
            self._entries[payload["entry_id"]].status = EntryStatus.FINALIZED
        elif action is AuditAction.SIGNED_OFF:
            report = report_from_payload(payload["report"])
            self._signed[report.report_id] = report
            self._drafts.pop(report.report_id, None)
            match = _REPORT_ID_RE.match(report.report_id)
            if match:
                self._report_seq = max(self._report_seq, int(match.group(1)))
        else:  # pragma: no cover - enum is closed
            raise StoreInconsistent(f"unknown audit action {action!r}")

    def _load_draft_cache(self) -> None:
        if self._drafts_path is None or not self._drafts_path.exists():
            return
        try:
            payloads = json.loads(self._drafts_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            return  # a broken cache just means drafts must be rebuilt
        for payload in payloads:
            report = report_from_payload(payload)
            if report.report_id in self._signed:
                continue
            self._drafts[report.report_id] = report
            match = _REPORT_ID_RE.match(report.report_id)
            if match:
                self._report_seq = max(self._report_seq, int(match.group(1)))

    def _save_draft_cache(self) -> None:
        if self._drafts_path is None:
            return
        payloads = [report_payload(self._drafts[rid]) for rid in sorted(self._drafts)]
        self._drafts_path.write_text(json.dumps(payloads), encoding="utf-8")

    def close(self) -> None:
        with self._lock:
            if self._log_file is not None:
                self._log_file.flush()
                self._log_file.close()
                self._log_file = None

    # -- master catalog ----------------------------------------------------

    def import_catalog(self, text: str, actor: str) -> ImportReport:
        with self._lock:
            staged, errors = self.catalog.stage_import(text)
            self._commit(self._now(), actor, [(
                AuditAction.CATALOG_IMPORTED,
                {"rows": staged, "loaded": len(staged), "error_count": len(errors)},
            )])
            return ImportReport(loaded=len(staged), errors=errors)

    def verify_catalog_entry(self, slno: int, specialist_id: str) -> CatalogEntry:
        with self._lock:
            self.catalog.require(slno)
            at = self._now()
            self._commit(at, specialist_id, [(
                AuditAction.CATALOG_VERIFIED,
                {"slno": slno, "specialist_id": specialist_id, "at": at.isoformat()},
            )])
            return self.catalog.require(slno)

    def lookup_range(self, slno: int):
        with self._lock:
            return self.catalog.lookup_range(slno)

    def range_hint(self, slno: int) -> tuple[CatalogEntry, int]:
        """Catalog entry plus the current catalog version, in one snapshot."""
        with self._lock:
            return self.catalog.require(slno), self.catalog.version

    def list_tests(self, name_filter: str | None = None) -> list[CatalogEntry]:
        with self._lock:
            return self.catalog.list_tests(name_filter)

    # -- patient registry ----------------------------------------------------

    def register_patient(self, uid: str, full_name: str, dob: date,
                         stated_age_years: int, contact: str | None,
                         actor: str, as_of: date | None = None) -> Patient:
        with self._lock:
            at = self._now()
            self.patients.validate_new(uid, dob, stated_age_years, as_of or at.date())
            patient = Patient(
                patient_uid=uid,
                full_name=full_name,
                dob=dob,
                stated_age_years=stated_age_years,
                contact=contact,
                registered_at=at,
            )
            self._commit(at, actor, [(
                AuditAction.PATIENT_REGISTERED, patient_payload(patient),
            )])
            return self.patients.get(uid)

    def find_patients(self, query: str) -> list[Patient]:
        with self._lock:
            return self.patients.find(query)

    # -- validation engine (read-only) ---------------------------------------

    def level1_check(self, slno: int, raw_value: str, unit: str | None,
                     at: datetime | None = None) -> ValidationOutcome:
        with self._lock:
            return level1_check(self.catalog, slno, raw_value, unit, at or self._now())

    def level2_recheck(self, entries: list[ResultEntry] | None = None) -> list[RecheckResult]:
        with self._lock:
            if entries is None:
                entries = sorted(self._entries.values(), key=lambda e: e.entry_id)
            return level2_recheck(self.catalog, entries)

    # -- results lifecycle ----------------------------------------------------

    def submit_result(self, patient_uid: str, slno: int, raw_value: str,
                      unit: str | None, operator_id: str) -> ResultEntry:
        with self._lock:
            if patient_uid not in self.patients:
                raise UnknownPatient(f"no patient registered with uid {patient_uid!r}")
            at = self._now()
            outcome = level1_check(self.catalog, slno, raw_value, unit, at)
            spec, _ = self.catalog.lookup_range(slno)
            qualitative = isinstance(spec, Qualitative)
            entry = ResultEntry(
                entry_id=f"E-{self._entry_seq + 1:06d}",
                patient_uid=patient_uid,
                slno=slno,
                value_verbatim=raw_value,
                value_decimal=None if qualitative else parse_decimal_value(raw_value),
                unit=unit,
                entered_by=operator_id,
                entered_at=at,
                level1=outcome,
                catalog_version=outcome.catalog_version,
                status=(EntryStatus.FLAGGED if outcome.classification in VIOLATIONS
                        else EntryStatus.ACCEPTED),
            )
            self._commit(at, operator_id, [(AuditAction.SUBMITTED, entry_payload(entry))])
            return self._entries[entry.entry_id]

    def _require_entry(self, entry_id: str) -> ResultEntry:
        entry = self._entries.get(entry_id)
        if entry is None:
            raise UnknownEntry(f"no entry with id {entry_id!r}")
        return entry

    def _check_review(self, entry_id: str, reason: str) -> ResultEntry:
        entry = self._require_entry(entry_id)
        if entry.status is not EntryStatus.FLAGGED:
            raise NotFlagged(f"entry {entry_id} is {entry.status.value}, not Flagged")
        if not reason.strip():
            raise EmptyReason("a non-empty reason is required")
        return entry

    def apply_override(self, entry_id: str, supervisor_id: str, reason: str) -> ResultEntry:
        with self._lock:
            entry = self._check_review(entry_id, reason)
            if supervisor_id == entry.entered_by:
                raise SelfOverride(
                    f"supervisor {supervisor_id} entered {entry_id} and may not override it"
                )
            at = self._now()
            self._commit(at, supervisor_id, [(AuditAction.OVERRIDDEN, {
                "entry_id": entry_id,
                "supervisor_id": supervisor_id,
                "reason": reason,
                "at": at.isoformat(),
            })])
            return self._entries[entry_id]

    def reject_entry(self, entry_id: str, supervisor_id: str, reason: str) -> ResultEntry:
        with self._lock:
            self._check_review(entry_id, reason)
            at = self._now()
            self._commit(at, supervisor_id, [(AuditAction.REJECTED, {
                "entry_id": entry_id,
                "supervisor_id": supervisor_id,
                "reason": reason,
                "at": at.isoformat(),
            })])
            return self._entries[entry_id]

    def flagged_entries(self) -> list[ResultEntry]:
        with self._lock:
            return sorted(
                (e for e in self._entries.values() if e.status is EntryStatus.FLAGGED),
                key=lambda e: e.entry_id,
            )

    def get_entry(self, entry_id: str) -> ResultEntry:
        with self._lock:
            return self._require_entry(entry_id)

    def all_entries(self) -> list[ResultEntry]:
        with self._lock:
            return [self._entries[entry_id] for entry_id in sorted(self._entries)]

    def audit_trail(self, entry_id: str) -> list[AuditEvent]:
        with self._lock:
            self._require_entry(entry_id)
            return [e for e in self._audit if e.payload.get("entry_id") == entry_id]

    def audit_log(self) -> list[AuditEvent]:
        with self._lock:
            return list(self._audit)

    # -- report builder --------------------------------------------------------

    def build_report(self, patient_uid: str, since: datetime | None = None,
                     until: datetime | None = None) -> Report:
        since = _coerce_utc(since)
        until = _coerce_utc(until)
        with self._lock:
            patient = self.patients.get(patient_uid)
            if patient is None:
                raise UnknownPatient(f"no patient registered with uid {patient_uid!r}")
            entries = sorted(
                (
                    e for e in self._entries.values()
                    if e.patient_uid == patient_uid
                    and e.status is not EntryStatus.REJECTED
                    and (since is None or e.entered_at >= since)
                    and (until is None or e.entered_at <= until)
                ),
                key=lambda e: (e.slno, e.entry_id),
            )
            disagreements = [
                r for r in level2_recheck(self.catalog, entries)
                if not r.agrees_with_level1
            ]
            if disagreements:
                raise StoreInconsistent(
                    "level-2 recheck disagrees with stored level-1 outcomes for: "
                    + ", ".join(r.entry_id for r in disagreements)
                )
            at = self._now()
            self._report_seq += 1
            report = Report(
                report_id=f"R-{self._report_seq:06d}",
                patient={
                    "patient_uid": patient.patient_uid,
                    "full_name": patient.full_name,
                    "dob": patient.dob.isoformat(),
                    "stated_age_years": patient.stated_age_years,
                },
                lines=[self._line_for(e) for e in entries],
                overrides=[
                    _override_note(e.override) for e in entries if e.override is not None
                ],
                status="Draft",
                built_at=at,
            )
            self._drafts[report.report_id] = report
            self._save_draft_cache()
            return report

    def _line_for(self, entry: ResultEntry) -> ReportLine:
        return ReportLine(
            entry_id=entry.entry_id,
            slno=entry.slno,
            test_name=self.catalog.require(entry.slno).test_name,
            value_verbatim=entry.value_verbatim,
            unit=entry.unit,
            normal_range_display=entry.level1.range_display,
            flag=FLAG_BY_CLASSIFICATION[entry.level1.classification],
            entry_status=entry.status.value,
            override_reason=entry.override.reason if entry.override else None,
        )

    def sign_off(self, report_id: str, supervisor_id: str) -> Report:
        with self._lock:
            if report_id in self._signed:
                raise AlreadySignedOff(f"report {report_id} is already signed off")
            draft = self._drafts.get(report_id)
            if draft is None:
                raise UnknownReport(f"no report with id {report_id!r}")

            live = []
            for line in draft.lines:
                entry = self._entries.get(line.entry_id)
                if entry is None:
                    raise StoreInconsistent(
                        f"report {report_id} references missing entry {line.entry_id}"
                    )
                if entry.status is EntryStatus.REJECTED:
                    continue  # rejected since the draft was built; drop the line
                live.append(entry)

            flagged = [e.entry_id for e in live if e.status is EntryStatus.FLAGGED]
            if flagged:
                raise UnresolvedViolations(
                    "cannot sign off; unresolved range violations on: " + ", ".join(flagged),
                    entry_ids=flagged,
                )
            unverified = sorted({
                e.slno for e in live if not self.catalog.require(e.slno).is_verified
            })
            if unverified:
                raise UnverifiedCatalogEntries(
                    "cannot sign off; catalog entries await specialist verification: "
                    + ", ".join(str(s) for s in unverified),
                    slnos=unverified,
                )

            at = self._now()
            lines = [
                ReportLine(
                    entry_id=e.entry_id,
                    slno=e.slno,
                    test_name=self.catalog.require(e.slno).test_name,
                    value_verbatim=e.value_verbatim,
                    unit=e.unit,
                    normal_range_display=e.level1.range_display,
                    flag=FLAG_BY_CLASSIFICATION[e.level1.classification],
                    entry_status=EntryStatus.FINALIZED.value,
                    override_reason=e.override.reason if e.override else None,
                )
                for e in live
            ]
            signed = Report(
                report_id=report_id,
                patient=draft.patient,
                lines=lines,
                overrides=[_override_note(e.override) for e in live if e.override is not None],
                status="SignedOff",
                built_at=draft.built_at,
                signed_by=supervisor_id,
                signed_at=at,
            )
            events: list[tuple[AuditAction, dict]] = [
                (AuditAction.FINALIZED, {"entry_id": e.entry_id, "report_id": report_id,
                                         "at": at.isoformat()})
                for e in live if e.status is not EntryStatus.FINALIZED
            ]
            events.append((AuditAction.SIGNED_OFF, {
                "report_id": report_id,
                "report": report_payload(signed),
            }))
            self._commit(at, supervisor_id, events)
            self._save_draft_cache()
            return self._signed[report_id]

    def get_report(self, report_id: str) -> Report:
        with self._lock:
            report = self._signed.get(report_id) or self._drafts.get(report_id)
            if report is None:
                raise UnknownReport(f"no report with id {report_id!r}")
            return report

    def signed_reports(self) -> list[Report]:
        with self._lock:
            return [self._signed[report_id] for report_id in sorted(self._signed)]

    def render_report(self, report_id: str, fmt: str = "text") -> bytes:
        with self._lock:
            report = self.get_report(report_id)
            if fmt == "structured":
                return render_structured(report)
            return render_text(report)

    # -- event-sourcing contract ------------------------------------------------

    def state_digest(self) -> bytes:
        """Canonical serialization of all durable state.

        Replaying the event log into a fresh repository must reproduce
        this byte-for-byte (drafts are transient and excluded).
        """
        with self._lock:
            state = {
                "catalog": {
                    "version": self.catalog.version,
                    "entries": [
                        {
                            "slno": e.slno,
                            "test_name": e.test_name,
                            "range_text": e.range_text,
                            "verification": (
                                {"specialist_id": e.verification.specialist_id,
                                 "at": e.verification.at.isoformat()}
                                if e.verification else None
                            ),
                            "review_note": e.review_note,
                        }
                        for e in self.catalog.list_tests()
                    ],
                    "history": self.catalog.history_texts(),
                },
                "patients": sorted(
                    (patient_payload(p) for p in self.patients.all()),
                    key=lambda p: p["patient_uid"],
                ),
                "entries": [
                    entry_payload(self._entries[entry_id])
                    for entry_id in sorted(self._entries)
                ],
                "signed_reports": [
                    report_payload(self._signed[report_id])
                    for report_id in sorted(self._signed)
                ],
                "audit": [event_record(e) for e in self._audit],
            }
            return json.dumps(state, ensure_ascii=False, sort_keys=True,
                              separators=(",", ":")).encode("utf-8")

    def replay_from_log(self) -> "Repository":
        """Fresh in-memory repository rebuilt from this store's event log.

        Round-trips every event through the wire encoding, so it verifies
        both the serialization and the replay contract.
        """
        with self._lock:
            if self._log_path is not None and self._log_path.exists():
                blob = self._log_path.read_bytes()
            else:
                blob = b"".join(encode_event(e) for e in self._audit)
        twin = Repository(uid_pattern=self._uid_pattern, clock=self._clock)
        for event in decode_events(blob):
            twin._apply(event)
        return twin


def _coerce_utc(stamp: datetime | None) -> datetime | None:
    """Window bounds may arrive naive (CLI flags, JSON); read them as UTC."""
    if stamp is not None and stamp.tzinfo is None:
        return stamp.replace(tzinfo=timezone.utc)
    return stamp


def _override_note(record: OverrideRecord) -> OverrideNote:
    return OverrideNote(
        entry_id=record.entry_id,
        supervisor_id=record.supervisor_id,
        reason=record.reason,
        at=record.at,
    )
