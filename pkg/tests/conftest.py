from __future__ import annotations

from datetime import datetime, timedelta, timezone
from importlib import resources

import pytest

from labrepo.store import Repository

CORPUS_EPOCH = datetime(2025, 1, 1, tzinfo=timezone.utc)


class FakeClock:
    """Deterministic clock: each call advances by a fixed step."""

    def __init__(self, start: datetime = CORPUS_EPOCH, step_seconds: int = 60):
        self.current = start
        self.step = timedelta(seconds=step_seconds)

    def __call__(self) -> datetime:
        stamp = self.current
        self.current = stamp + self.step
        return stamp


@pytest.fixture()
def corpus_text() -> str:
    return resources.files("labrepo").joinpath("data/blood_chemistry.csv").read_text("utf-8")


@pytest.fixture()
def repo() -> Repository:
    return Repository(clock=FakeClock())


@pytest.fixture()
def loaded_repo(repo: Repository, corpus_text: str) -> Repository:
    report = repo.import_catalog(corpus_text, actor="admin")
    assert report.loaded == 28 and not report.errors
    return repo


@pytest.fixture()
def staffed_repo(loaded_repo: Repository) -> Repository:
    """Corpus imported, everything verified, one patient registered."""
    for entry in loaded_repo.list_tests():
        loaded_repo.verify_catalog_entry(entry.slno, specialist_id="DR-01")
    loaded_repo.register_patient(
        uid="P-0001", full_name="John Smith", dob=CORPUS_EPOCH.date().replace(year=2000),
        stated_age_years=25, contact=None, actor="frontdesk",
    )
    return loaded_repo
