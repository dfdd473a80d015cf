"""Domain error hierarchy shared by the store, the API and the CLI.

Every error carries a stable ``code`` (its class name) so the API error
envelope and the CLI stderr output identify failures identically.
"""

from __future__ import annotations


class LabRepoError(Exception):
    """Base class for all domain errors."""

    @property
    def code(self) -> str:
        return type(self).__name__

    @property
    def detail(self) -> str:
        return str(self)


# --- range grammar ---------------------------------------------------------

class MalformedRange(LabRepoError):
    """Range text that does not fit the catalog grammar."""


# --- master catalog --------------------------------------------------------

class MalformedFile(LabRepoError):
    """Import file whose header or structure is unusable; aborts the import."""


class MalformedRow(LabRepoError):
    """Structurally invalid import row (bad serial, empty test name)."""


class DuplicateSlno(LabRepoError):
    pass


class DuplicateTestName(LabRepoError):
    pass


class UnknownSlno(LabRepoError):
    pass


# --- patient registry ------------------------------------------------------

class DuplicateUid(LabRepoError):
    pass


class MalformedUid(LabRepoError):
    pass


class FutureDob(LabRepoError):
    pass


class AgeDobMismatch(LabRepoError):
    def __init__(self, message: str, computed_age: int):
        super().__init__(message)
        self.computed_age = computed_age


# --- validation engine -----------------------------------------------------

class NonNumericValue(LabRepoError):
    """Numeric test given a value that does not parse as a decimal."""


# --- results repository ----------------------------------------------------

class UnknownPatient(LabRepoError):
    pass


class UnknownEntry(LabRepoError):
    pass


class NotFlagged(LabRepoError):
    pass


class EmptyReason(LabRepoError):
    pass


class SelfOverride(LabRepoError):
    """Supervisor attempting to override their own entry (four-eyes rule)."""


# --- report builder --------------------------------------------------------

class UnknownReport(LabRepoError):
    pass


class AlreadySignedOff(LabRepoError):
    pass


class UnresolvedViolations(LabRepoError):
    def __init__(self, message: str, entry_ids: list[str]):
        super().__init__(message)
        self.entry_ids = entry_ids


class UnverifiedCatalogEntries(LabRepoError):
    def __init__(self, message: str, slnos: list[int]):
        super().__init__(message)
        self.slnos = slnos


class StoreInconsistent(LabRepoError):
    """Level-2 recheck disagreed with stored level-1 outcomes."""


# --- service ----------------------------------------------------------------

class ConfigInvalid(LabRepoError):
    pass


class PortUnavailable(LabRepoError):
    pass
