"""Two-level validation engine.

Level 1 runs at entry time: parse the typed value, fetch the range for the
test, classify, and hand back the display text the operator sees.  Level 2
runs at report time: every stored classification is re-derived from the
catalog version recorded on the entry, and any disagreement is reported
rather than patched.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from decimal import Decimal, InvalidOperation
from typing import TYPE_CHECKING, Iterable

from .catalog import Catalog
from .errors import NonNumericValue
from .ranges import Classification, Qualitative, classify

if TYPE_CHECKING:  # pragma: no cover
    from .store import ResultEntry


@dataclass(frozen=True)
class ValidationOutcome:
    classification: Classification
    range_display: str
    catalog_version: int
    level: int
    at: datetime


@dataclass(frozen=True)
class RecheckResult:
    entry_id: str
    classification: Classification
    agrees_with_level1: bool


def parse_decimal_value(raw: str) -> Decimal:
    """Parse an operator-typed result value as an exact decimal."""
    try:
        value = Decimal(raw.strip())
    except (InvalidOperation, ValueError, AttributeError) as exc:
        raise NonNumericValue(f"value {raw!r} is not numeric") from exc
    if not value.is_finite():
        raise NonNumericValue(f"value {raw!r} is not a finite number")
    return value


def level1_check(catalog: Catalog, slno: int, raw_value: str,
                 unit: str | None, at: datetime) -> ValidationOutcome:
    """Entry-time check: classify the raw value against the current catalog.

    For qualitative tests the raw value is accepted verbatim and the
    classification is Indeterminate.  For numeric tests an unparseable
    value is a hard error; nothing may be stored.
    """
    spec, display = catalog.lookup_range(slno)
    if isinstance(spec, Qualitative):
        outcome = Classification.INDETERMINATE
    else:
        outcome = classify(parse_decimal_value(raw_value), unit, spec)
    return ValidationOutcome(
        classification=outcome,
        range_display=display,
        catalog_version=catalog.version,
        level=1,
        at=at,
    )


def level2_recheck(catalog: Catalog, entries: Iterable["ResultEntry"]) -> list[RecheckResult]:
    """Report-time check: re-derive every classification from stored data.

    Each entry is checked against the catalog version it was validated
    under, so later range edits never retroactively re-flag stored data;
    a disagreement therefore always signals tampering or a bug.
    """
    results = []
    for entry in entries:
        spec, _ = catalog.range_at(entry.catalog_version, entry.slno)
        if isinstance(spec, Qualitative) or entry.value_decimal is None:
            outcome = Classification.INDETERMINATE
        else:
            outcome = classify(entry.value_decimal, entry.unit, spec)
        results.append(RecheckResult(
            entry_id=entry.entry_id,
            classification=outcome,
            agrees_with_level1=outcome == entry.level1.classification,
        ))
    return results
