import json

import pytest

from geokin.chart import Chart, ChartKind
from geokin.identities import LawReport, _Runner, run_identity_suite, suite_passed

ALL_CHARTS = [
    Chart(kind, n) for kind in ChartKind for n in (1, 2)
]


@pytest.mark.parametrize("chart", ALL_CHARTS, ids=lambda c: f"{c.kind.value}-n{c.n}")
def test_every_law_passes(chart):
    reports = run_identity_suite(chart, seed=0, trials=5)
    failures = [r for r in reports if not r.passed]
    assert not failures, "\n".join(f"{r.name}: {r.witness}" for r in failures)
    assert len(reports) >= 15


def test_law_names_are_unique_and_stable():
    chart = Chart(ChartKind.COCONTACT, 1)
    names = [r.name for r in run_identity_suite(chart, seed=3, trials=2)]
    assert len(names) == len(set(names))
    # spot checks pinning the naming scheme the CLI exposes
    assert "musical/roundtrips" in names
    assert "bracket/jacobi-cocontact/weak-leibniz-defect" in names
    assert "bracket/almost-poisson-cocontact/jacobi-fails-witness" in names
    assert "field/hamiltonian/one/lie-laws" in names
    assert "homomorphism/strict" in names
    assert "kinetics/adjudication" in names


def test_suite_grows_with_structure():
    sizes = {
        kind: len(run_identity_suite(Chart(kind, 1), trials=1))
        for kind in ChartKind
    }
    assert sizes[ChartKind.SYMPLECTIC] < sizes[ChartKind.COSYMPLECTIC]
    assert sizes[ChartKind.COSYMPLECTIC] < sizes[ChartKind.CONTACT]
    assert sizes[ChartKind.CONTACT] < sizes[ChartKind.COCONTACT]


def test_reports_serialize_to_json():
    reports = run_identity_suite(Chart(ChartKind.SYMPLECTIC, 1), trials=2)
    blob = json.dumps([r.as_dict() for r in reports])
    parsed = json.loads(blob)
    assert all(entry["status"] == "pass" for entry in parsed)
    assert "witness" not in parsed[0]  # passes omit the witness key


def test_failed_report_carries_witness():
    r = LawReport("demo/law", "fail", witness="F = q1")
    assert not r.passed
    assert r.as_dict() == {"law": "demo/law", "status": "fail", "witness": "F = q1"}
    assert not suite_passed([LawReport("a", "pass"), r])


def test_runner_turns_crash_into_failure():
    run = _Runner(Chart(ChartKind.SYMPLECTIC, 1), seed=0, trials=1)

    def boom():
        raise RuntimeError("exploded mid-check")

    run.check("demo/crash", boom)
    (report,) = run.reports
    assert report.status == "fail"
    assert "RuntimeError" in report.witness
    assert "exploded mid-check" in report.witness


def test_trials_must_be_positive():
    with pytest.raises(ValueError):
        run_identity_suite(Chart(ChartKind.CONTACT, 1), trials=0)


def test_same_seed_same_reports():
    chart = Chart(ChartKind.CONTACT, 2)
    a = run_identity_suite(chart, seed=9, trials=3)
    b = run_identity_suite(chart, seed=9, trials=3)
    assert [r.as_dict() for r in a] == [r.as_dict() for r in b]
