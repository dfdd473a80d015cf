"""Master table of tests and specialist-verified reference ranges.

The catalog is imported from CSV (header ``SLNO,Test_Name,Value_Range``),
keeps every range string both raw (for display) and parsed (for
classification), and is versioned: each import that loads rows creates a
new version whose slno->range mapping is retained so stored results can be
re-checked against the exact ranges in force when they were entered.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime

from .errors import (
    DuplicateSlno,
    DuplicateTestName,
    MalformedFile,
    MalformedRange,
    MalformedRow,
    UnknownSlno,
)
from .ranges import Qualitative, RangeSpec, SingleValue, parse_range

EXPECTED_HEADER = ["SLNO", "Test_Name", "Value_Range"]

# Entries whose parsed range is degenerate start out with this note so the
# specialist review step cannot miss them.
DEGENERATE_RANGE_NOTE = "degenerate range: specialist confirmation required"


@dataclass
class Verified:
    specialist_id: str
    at: datetime


@dataclass
class CatalogEntry:
    """One master-table row: serial key, test name, raw + parsed range."""

    slno: int
    test_name: str
    range_text: str
    range: RangeSpec
    verification: Verified | None = None
    review_note: str | None = None

    @property
    def is_verified(self) -> bool:
        return self.verification is not None


@dataclass
class ImportReport:
    loaded: int
    errors: list[dict] = field(default_factory=list)


def _new_entry(slno: int, test_name: str, range_text: str) -> CatalogEntry:
    spec = parse_range(range_text)
    note = DEGENERATE_RANGE_NOTE if isinstance(spec, (SingleValue, Qualitative)) else None
    return CatalogEntry(slno=slno, test_name=test_name, range_text=range_text,
                        range=spec, review_note=note)


class Catalog:
    """In-memory master table with per-version range history.

    Mutations happen in two phases so the repository layer can event-source
    them: ``stage_import`` validates rows against current state without
    changing anything; ``apply_import``/``apply_verify`` replay validated
    payloads.
    """

    def __init__(self) -> None:
        self.entries: dict[int, CatalogEntry] = {}
        self.version = 0
        self._names: dict[str, int] = {}
        self._history: dict[int, dict[int, tuple[RangeSpec, str]]] = {0: {}}

    # -- import ---------------------------------------------------------

    def stage_import(self, text: str) -> tuple[list[dict], list[dict]]:
        """Validate a CSV import; returns (loadable row payloads, row errors).

        Row failures are per-row; only a missing or wrong header aborts.
        """
        try:
            rows = list(csv.reader(io.StringIO(text.lstrip("﻿"))))
        except csv.Error as exc:
            raise MalformedFile(f"unreadable CSV: {exc}") from exc
        if not rows:
            raise MalformedFile("empty file: header row required")
        header = [cell.strip() for cell in rows[0]]
        if header != EXPECTED_HEADER:
            raise MalformedFile(
                f"header must be exactly {','.join(EXPECTED_HEADER)}, got {','.join(header)!r}"
            )

        staged: list[dict] = []
        errors: list[dict] = []
        seen_slnos = set(self.entries)
        seen_names = set(self._names)

        def reject(line_no: int, row: list[str], exc: Exception) -> None:
            errors.append({
                "line": line_no,
                "row": ",".join(row),
                "error": getattr(exc, "code", type(exc).__name__),
                "detail": str(exc),
            })

        for line_no, row in enumerate(rows[1:], start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                if len(row) != 3:
                    raise MalformedRow(f"expected 3 columns, got {len(row)}")
                slno_raw, name_raw, range_raw = (cell.strip() for cell in row)
                if not slno_raw.isdigit() or int(slno_raw) < 1:
                    raise MalformedRow(f"SLNO must be a positive integer, got {slno_raw!r}")
                slno = int(slno_raw)
                if not name_raw:
                    raise MalformedRow("Test_Name must be non-empty")
                if slno in seen_slnos:
                    raise DuplicateSlno(f"SLNO {slno} already present")
                name_key = name_raw.casefold()
                if name_key in seen_names:
                    raise DuplicateTestName(f"test name {name_raw!r} already present")
                parse_range(range_raw)  # raises MalformedRange
            except (MalformedRow, MalformedRange, DuplicateSlno, DuplicateTestName) as exc:
                reject(line_no, row, exc)
                continue
            seen_slnos.add(slno)
            seen_names.add(name_key)
            staged.append({"slno": slno, "test_name": name_raw, "range_text": range_raw})
        return staged, errors

    def apply_import(self, rows: list[dict]) -> None:
        for row in rows:
            entry = _new_entry(row["slno"], row["test_name"], row["range_text"])
            self.entries[entry.slno] = entry
            self._names[entry.test_name.casefold()] = entry.slno
        if rows:
            self.version += 1
            self._history[self.version] = {
                slno: (e.range, e.range_text) for slno, e in self.entries.items()
            }

    # -- verification -----------------------------------------------------

    def require(self, slno: int) -> CatalogEntry:
        entry = self.entries.get(slno)
        if entry is None:
            raise UnknownSlno(f"no catalog entry with SLNO {slno}")
        return entry

    def apply_verify(self, slno: int, specialist_id: str, at: datetime) -> CatalogEntry:
        entry = self.require(slno)
        entry.verification = Verified(specialist_id=specialist_id, at=at)
        return entry

    # -- lookups ----------------------------------------------------------

    def lookup_range(self, slno: int) -> tuple[RangeSpec, str]:
        """Spec plus raw display text for the entry-form range hint."""
        entry = self.require(slno)
        return entry.range, entry.range_text

    def range_at(self, version: int, slno: int) -> tuple[RangeSpec, str]:
        """Range as of a historical catalog version (for level-2 rechecks)."""
        snapshot = self._history.get(version)
        if snapshot is None or slno not in snapshot:
            raise UnknownSlno(
                f"SLNO {slno} not resolvable at catalog version {version}"
            )
        return snapshot[slno]

    def list_tests(self, name_filter: str | None = None) -> list[CatalogEntry]:
        entries = sorted(self.entries.values(), key=lambda e: e.slno)
        if name_filter:
            needle = name_filter.casefold()
            entries = [e for e in entries if needle in e.test_name.casefold()]
        return entries

    def history_texts(self) -> dict[str, dict[str, str]]:
        """Raw range text per slno for every catalog version (digest form)."""
        return {
            str(version): {str(slno): text for slno, (_, text) in snapshot.items()}
            for version, snapshot in self._history.items()
        }
