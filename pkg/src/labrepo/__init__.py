"""Single-node clinical lab-results repository.

Reference ranges live in a specialist-verified master catalog; every
result entry is classified against its range at entry time (level 1) and
re-derived at report time (level 2); out-of-range values need a
supervised, reasoned override before a report can be signed off.
"""

from .catalog import Catalog, CatalogEntry, ImportReport
from .errors import LabRepoError
from .patients import Patient, compute_age
from .ranges import (
    Classification,
    Closed,
    LowerBound,
    Qualitative,
    RangeSpec,
    SingleValue,
    UpperBound,
    classify,
    format_range,
    parse_range,
)
from .store import Repository
from .validation import ValidationOutcome, level1_check, level2_recheck

__all__ = [
    "Catalog",
    "CatalogEntry",
    "Classification",
    "Closed",
    "ImportReport",
    "LabRepoError",
    "LowerBound",
    "Patient",
    "Qualitative",
    "RangeSpec",
    "Repository",
    "SingleValue",
    "UpperBound",
    "ValidationOutcome",
    "classify",
    "compute_age",
    "format_range",
    "level1_check",
    "level2_recheck",
    "parse_range",
]

__version__ = "0.1.0"
