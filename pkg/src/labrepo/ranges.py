"""Reference-range grammar: parsing, canonical formatting and classification.

Catalog range strings come in a handful of notations::

    60-110 mg/dl      closed interval, inclusive endpoints
    < 140 mg/dl       upper bound, strict
    > 1               lower bound, strict
    3.5 mg/dl         single value (degenerate; kept verbatim)
    (blank)           qualitative test, no numeric range

Parsing is whitespace tolerant.  Numbers are plain decimals (``digits
['.' digits]``); negatives are rejected so that ``-`` always reads as the
interval separator.  The unit is whatever trails the number(s), trimmed;
it may contain internal spaces ("KA Units") but never ``-``.

All numeric work uses :class:`decimal.Decimal` so endpoint inclusivity is
exact rather than subject to binary floating point rounding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from enum import Enum

from .errors import MalformedRange

__all__ = [
    "AboveUL",
    "BelowLL",
    "Classification",
    "Closed",
    "LowerBound",
    "Qualitative",
    "RangeSpec",
    "SingleValue",
    "UpperBound",
    "classify",
    "format_decimal",
    "format_range",
    "normalize_unit",
    "parse_range",
]


class Classification(str, Enum):
    """Outcome of checking one observation against a range spec."""

    IN_RANGE = "InRange"
    BELOW_LL = "BelowLL"
    ABOVE_UL = "AboveUL"
    UNIT_MISMATCH = "UnitMismatch"
    INDETERMINATE = "Indeterminate"


# Convenience aliases matching the flag names used on reports.
BelowLL = Classification.BELOW_LL
AboveUL = Classification.ABOVE_UL


def _check_amount(value: Decimal, label: str) -> None:
    if not isinstance(value, Decimal):
        raise ValueError(f"{label} must be a Decimal, got {type(value).__name__}")
    if not value.is_finite():
        raise ValueError(f"{label} must be finite")
    if value < 0:
        raise ValueError(f"{label} must be non-negative")


def _check_unit(unit: str | None) -> None:
    if unit is None:
        return
    if not isinstance(unit, str):
        raise ValueError("unit must be a string or None")
    if unit != unit.strip() or not unit:
        raise ValueError("unit must be non-empty and trimmed")
    if "-" in unit:
        raise ValueError("unit may not contain '-' (reserved interval separator)")
    if "\n" in unit or "\r" in unit:
        raise ValueError("unit may not span lines")


@dataclass(frozen=True)
class Closed:
    """Inclusive interval: low <= value <= high is in range."""

    low: Decimal
    high: Decimal
    unit: str | None = None
    kind = "Closed"

    def __post_init__(self):
        _check_amount(self.low, "low")
        _check_amount(self.high, "high")
        _check_unit(self.unit)
        if self.low > self.high:
            raise ValueError(f"inverted bounds: {self.low} > {self.high}")


@dataclass(frozen=True)
class UpperBound:
    """Strict upper bound: value must be strictly below the limit."""

    limit: Decimal
    unit: str | None = None
    kind = "UpperBound"

    def __post_init__(self):
        _check_amount(self.limit, "limit")
        _check_unit(self.unit)


@dataclass(frozen=True)
class LowerBound:
    """Strict lower bound: value must be strictly above the limit."""

    limit: Decimal
    unit: str | None = None
    kind = "LowerBound"

    def __post_init__(self):
        _check_amount(self.limit, "limit")
        _check_unit(self.unit)


@dataclass(frozen=True)
class SingleValue:
    """Degenerate one-point range, preserved as imported."""

    value: Decimal
    unit: str | None = None
    kind = "SingleValue"

    def __post_init__(self):
        _check_amount(self.value, "value")
        _check_unit(self.unit)


@dataclass(frozen=True)
class Qualitative:
    """No numeric range; observations are recorded verbatim."""

    kind = "Qualitative"


RangeSpec = Closed | UpperBound | LowerBound | SingleValue | Qualitative

_NUMBER_RE = re.compile(r"^(\d+(?:\.\d+)?)\s*(.*)$", re.DOTALL)


def _parse_number(token: str) -> Decimal:
    token = token.strip()
    if not re.fullmatch(r"\d+(?:\.\d+)?", token):
        raise MalformedRange(f"not a number: {token!r}")
    try:
        value = Decimal(token)
    except InvalidOperation as exc:  # pragma: no cover - regex precludes this
        raise MalformedRange(f"not a number: {token!r}") from exc
    if not value.is_finite():
        raise MalformedRange(f"non-finite number: {token!r}")
    return value


def _split_number_unit(text: str) -> tuple[Decimal, str | None]:
    match = _NUMBER_RE.match(text.strip())
    if not match:
        raise MalformedRange(f"expected a number: {text!r}")
    number = _parse_number(match.group(1))
    unit = match.group(2).strip()
    return number, unit or None


def parse_range(text: str) -> RangeSpec:
    """Parse raw catalog range text into a typed spec.

    Raises :class:`MalformedRange` for anything outside the grammar:
    unparseable text, more than one ``-``, inverted bounds.
    """
    stripped = text.strip()
    if not stripped:
        return Qualitative()
    try:
        if stripped[0] in "<>":
            limit, unit = _split_number_unit(stripped[1:])
            if stripped[0] == "<":
                return UpperBound(limit, unit)
            return LowerBound(limit, unit)
        if "-" in stripped:
            if stripped.count("-") > 1:
                raise MalformedRange(f"more than one '-': {text!r}")
            left, right = stripped.split("-")
            low = _parse_number(left)
            high, unit = _split_number_unit(right)
            if low > high:
                raise MalformedRange(f"inverted bounds: {text!r}")
            return Closed(low, high, unit)
        value, unit = _split_number_unit(stripped)
        return SingleValue(value, unit)
    except ValueError as exc:
        # Spec constructors reject out-of-domain fields (e.g. units with '-').
        raise MalformedRange(str(exc)) from exc


def format_decimal(value: Decimal) -> str:
    # normalize() drops trailing zeros; 'f' form avoids E-notation for e.g. 60.
    return format(value.normalize(), "f")


def format_range(spec: RangeSpec) -> str:
    """Render a spec canonically: "L-H unit", "< X unit", "> X unit", "X unit", ""."""
    if isinstance(spec, Qualitative):
        return ""
    suffix = f" {spec.unit}" if spec.unit else ""
    if isinstance(spec, Closed):
        return f"{format_decimal(spec.low)}-{format_decimal(spec.high)}{suffix}"
    if isinstance(spec, UpperBound):
        return f"< {format_decimal(spec.limit)}{suffix}"
    if isinstance(spec, LowerBound):
        return f"> {format_decimal(spec.limit)}{suffix}"
    return f"{format_decimal(spec.value)}{suffix}"


def normalize_unit(unit: str | None) -> str | None:
    """Trim, collapse internal whitespace and lowercase a unit token."""
    if unit is None:
        return None
    collapsed = " ".join(unit.split())
    return collapsed.lower() or None


def classify(value: Decimal, unit: str | None, spec: RangeSpec) -> Classification:
    """Classify one numeric observation against a spec.

    Units are compared first, token-wise (no conversion); a mismatch is
    reported only when both sides actually carry a unit.  Closed intervals
    include their endpoints; comparator bounds are strict.
    """
    if isinstance(spec, Qualitative):
        return Classification.INDETERMINATE
    obs_unit = normalize_unit(unit)
    spec_unit = normalize_unit(spec.unit)
    if obs_unit and spec_unit and obs_unit != spec_unit:
        return Classification.UNIT_MISMATCH
    if isinstance(spec, Closed):
        if value < spec.low:
            return Classification.BELOW_LL
        if value > spec.high:
            return Classification.ABOVE_UL
        return Classification.IN_RANGE
    if isinstance(spec, UpperBound):
        return Classification.ABOVE_UL if value >= spec.limit else Classification.IN_RANGE
    if isinstance(spec, LowerBound):
        return Classification.BELOW_LL if value <= spec.limit else Classification.IN_RANGE
    if value == spec.value:
        return Classification.IN_RANGE
    return Classification.BELOW_LL if value < spec.value else Classification.ABOVE_UL
