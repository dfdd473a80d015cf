"""Patient registry with hard validation of unique ID, DOB and stated age.

Age must match the date of birth exactly in completed calendar years; a
mismatch rejects the registration outright so a keying error in either
field is caught at the door rather than stored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date, datetime

from .errors import AgeDobMismatch, DuplicateUid, FutureDob, MalformedUid

# Permissive alphanumeric-with-dashes, at least 4 characters; the service
# config can replace this per deployment.
DEFAULT_UID_PATTERN = r"^[A-Za-z0-9][A-Za-z0-9-]{3,}$"


@dataclass
class Patient:
    patient_uid: str
    full_name: str
    dob: date
    stated_age_years: int
    contact: str | None
    registered_at: datetime


def compute_age(dob: date, as_of: date) -> int:
    """Completed calendar years between dob and as_of.

    A Feb-29 birthday completes its year on Mar-01 in non-leap years.
    """
    if dob > as_of:
        raise FutureDob(f"date of birth {dob.isoformat()} is after {as_of.isoformat()}")
    age = as_of.year - dob.year
    if (as_of.month, as_of.day) < (dob.month, dob.day):
        age -= 1
    return age


class PatientRegistry:
    def __init__(self, uid_pattern: str = DEFAULT_UID_PATTERN) -> None:
        self._uid_re = re.compile(uid_pattern)
        self._patients: dict[str, Patient] = {}

    def validate_new(self, uid: str, dob: date, stated_age_years: int, as_of: date) -> None:
        """Raise unless the registration would satisfy every invariant.

        Performs no writes; a rejected registration stores nothing.
        """
        if not uid or not self._uid_re.fullmatch(uid):
            raise MalformedUid(f"uid {uid!r} does not match the configured pattern")
        if uid in self._patients:
            raise DuplicateUid(f"uid {uid!r} is already registered")
        computed = compute_age(dob, as_of)  # raises FutureDob
        if computed != stated_age_years:
            raise AgeDobMismatch(
                f"stated age {stated_age_years} does not match date of birth "
                f"(computed age: {computed})",
                computed_age=computed,
            )

    def apply_add(self, patient: Patient) -> None:
        self._patients[patient.patient_uid] = patient

    def get(self, uid: str) -> Patient | None:
        return self._patients.get(uid)

    def find(self, query: str) -> list[Patient]:
        """Exact-uid hit first, then case-insensitive name substring matches.

        Blank queries match nothing.  Order is stable by registration time.
        """
        query = query.strip()
        if not query:
            return []
        uid_hit = self._patients.get(query)
        needle = query.casefold()
        ordered = sorted(self._patients.values(), key=lambda p: p.registered_at)
        name_hits = [
            p for p in ordered
            if needle in p.full_name.casefold() and p is not uid_hit
        ]
        return ([uid_hit] if uid_hit else []) + name_hits

    def all(self) -> list[Patient]:
        return sorted(self._patients.values(), key=lambda p: p.registered_at)

    def __contains__(self, uid: str) -> bool:
        return uid in self._patients

    def __len__(self) -> int:
        return len(self._patients)
