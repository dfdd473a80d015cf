from __future__ import annotations

from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from labrepo.catalog import DEGENERATE_RANGE_NOTE, Catalog
from labrepo.errors import MalformedFile, UnknownSlno
from labrepo.ranges import Closed, Qualitative, UpperBound

D = Decimal

HEADER = "SLNO,Test_Name,Value_Range"


def test_corpus_import_loads_all_rows(loaded_repo, corpus_text):
    entries = loaded_repo.list_tests()
    assert len(entries) == 28
    assert entries[0].test_name == "PlasmaGlucoseF"
    # display text round-trips the source strings (whitespace-trimmed)
    source = {
        int(line.split(",", 2)[0]): line.split(",", 2)[2].strip()
        for line in corpus_text.splitlines()[1:] if line
    }
    for slno, expected in source.items():
        _, display = loaded_repo.lookup_range(slno)
        assert display == expected


def test_lookup_range_examples(loaded_repo):
    spec, display = loaded_repo.lookup_range(1)
    assert spec == Closed(D("60"), D("110"), "mg/dl")
    assert display == "60-110 mg/dl"
    spec, display = loaded_repo.lookup_range(4)
    assert spec == UpperBound(D("6.5"), "%")
    assert display == "< 6.5%"
    with pytest.raises(UnknownSlno):
        loaded_repo.lookup_range(999)


def test_duplicate_slno_rejects_second_row(repo):
    text = f"{HEADER}\n1,TestA,60-110 mg/dl\n1,TestB,80-140 mg/dl\n"
    report = repo.import_catalog(text, actor="admin")
    assert report.loaded == 1
    assert [e["error"] for e in report.errors] == ["DuplicateSlno"]
    assert repo.list_tests()[0].test_name == "TestA"


def test_duplicate_test_name_is_case_insensitive(repo):
    text = f"{HEADER}\n1,Glucose,60-110\n2,GLUCOSE,80-140\n"
    report = repo.import_catalog(text, actor="admin")
    assert report.loaded == 1
    assert [e["error"] for e in report.errors] == ["DuplicateTestName"]


def test_duplicates_checked_against_prior_imports(repo):
    repo.import_catalog(f"{HEADER}\n1,Glucose,60-110\n", actor="admin")
    report = repo.import_catalog(f"{HEADER}\n1,Other,1-2\n2,glucose,1-2\n", actor="admin")
    assert report.loaded == 0
    assert sorted(e["error"] for e in report.errors) == ["DuplicateSlno", "DuplicateTestName"]


def test_empty_file_with_header_loads_nothing(repo):
    report = repo.import_catalog(HEADER + "\n", actor="admin")
    assert report.loaded == 0 and report.errors == []


@pytest.mark.parametrize("text", [
    "",
    "SLNO,Test_Name\n",
    "slno,name,range\n1,Glucose,60-110\n",
    "Test_Name,SLNO,Value_Range\n",
])
def test_bad_header_aborts_whole_import(repo, text):
    with pytest.raises(MalformedFile):
        repo.import_catalog(text, actor="admin")
    assert repo.list_tests() == []


def test_row_errors_are_per_row_not_per_file(repo):
    text = (f"{HEADER}\n"
            "1,Glucose,60-110 mg/dl\n"
            "x,BadSerial,60-110\n"
            "3,,60-110\n"
            "4,BadRange,110-60\n"
            "5,Fine,< 6.5%\n")
    report = repo.import_catalog(text, actor="admin")
    assert report.loaded == 2
    assert [e["error"] for e in report.errors] == [
        "MalformedRow", "MalformedRow", "MalformedRange",
    ]
    assert [e["line"] for e in report.errors] == [3, 4, 5]
    assert [e.slno for e in repo.list_tests()] == [1, 5]


def test_quoted_fields_and_blank_range(repo):
    text = f'{HEADER}\n"1","Trop ITC",""\n2,"AG","> 1"\n'
    report = repo.import_catalog(text, actor="admin")
    assert report.loaded == 2
    spec, display = repo.lookup_range(1)
    assert spec == Qualitative() and display == ""


def test_degenerate_ranges_start_with_review_note(loaded_repo):
    by_slno = {e.slno: e for e in loaded_repo.list_tests()}
    assert by_slno[19].review_note == DEGENERATE_RANGE_NOTE   # single value
    assert by_slno[28].review_note == DEGENERATE_RANGE_NOTE   # qualitative
    assert by_slno[1].review_note is None


def test_verify_entry_sets_and_updates_verification(loaded_repo):
    entry = loaded_repo.verify_catalog_entry(1, specialist_id="DR-01")
    assert entry.verification.specialist_id == "DR-01"
    first_at = entry.verification.at
    entry = loaded_repo.verify_catalog_entry(1, specialist_id="DR-02")
    assert entry.verification.specialist_id == "DR-02"
    assert entry.verification.at > first_at


def test_verify_unknown_slno(loaded_repo):
    with pytest.raises(UnknownSlno):
        loaded_repo.verify_catalog_entry(999, specialist_id="DR-01")


def test_verify_retains_review_note_and_range(loaded_repo):
    before = {e.slno: (e.range, e.range_text) for e in loaded_repo.list_tests()}
    entry = loaded_repo.verify_catalog_entry(19, specialist_id="DR-01")
    assert entry.review_note == DEGENERATE_RANGE_NOTE
    after = {e.slno: (e.range, e.range_text) for e in loaded_repo.list_tests()}
    assert before == after


def test_list_tests_filtering(loaded_repo):
    assert len(loaded_repo.list_tests()) == 28
    # 18 test names contain "Serum" (SeruminOrgPhos included), counted by
    # scanning the source names
    serum = loaded_repo.list_tests("Serum")
    assert len(serum) == 18
    assert all("serum" in e.test_name.lower() for e in serum)
    assert loaded_repo.list_tests("serum") == serum  # case-insensitive
    assert loaded_repo.list_tests("zzz") == []


def test_each_loading_import_bumps_version(repo):
    assert repo.catalog.version == 0
    repo.import_catalog(f"{HEADER}\n1,A,1-2\n", actor="admin")
    assert repo.catalog.version == 1
    repo.import_catalog(f"{HEADER}\n2,B,3-4\n", actor="admin")
    assert repo.catalog.version == 2
    # an import that loads nothing does not create a version
    repo.import_catalog(HEADER + "\n", actor="admin")
    assert repo.catalog.version == 2


def test_range_at_resolves_historical_versions(repo):
    repo.import_catalog(f"{HEADER}\n1,A,1-2\n", actor="admin")
    repo.import_catalog(f"{HEADER}\n2,B,3-4\n", actor="admin")
    spec, text = repo.catalog.range_at(1, 1)
    assert text == "1-2"
    with pytest.raises(UnknownSlno):
        repo.catalog.range_at(1, 2)  # slno 2 did not exist at version 1
    spec, text = repo.catalog.range_at(2, 2)
    assert text == "3-4"
    with pytest.raises(UnknownSlno):
        repo.catalog.range_at(3, 1)  # version 3 never existed


# --- uniqueness under random import sequences ---------------------------------

row_strategy = st.tuples(
    st.integers(min_value=1, max_value=6),
    st.sampled_from(["Alpha", "Beta", "GAMMA", "gamma", "ALPHA"]),
    st.sampled_from(["1-2", "< 3", "", "4.5"]),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(row_strategy, min_size=0, max_size=6), min_size=1, max_size=4))
def test_no_two_live_entries_share_keys_under_random_imports(batches):
    catalog = Catalog()
    for batch in batches:
        text = HEADER + "\n" + "".join(
            f"{slno},{name},{rng}\n" for slno, name, rng in batch
        )
        staged, _ = catalog.stage_import(text)
        catalog.apply_import(staged)
        slnos = [e.slno for e in catalog.list_tests()]
        names = [e.test_name.casefold() for e in catalog.list_tests()]
        assert len(slnos) == len(set(slnos))
        assert len(names) == len(set(names))
