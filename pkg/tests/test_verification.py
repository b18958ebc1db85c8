import pytest

from thrifty.errors import InvalidParameter
from thrifty.verification import SUITES, SuiteReport, run_suite


def _failures(report):
    return [(c.name, c.measured, c.tolerance) for c in report.checks if not c.passed]


@pytest.mark.parametrize("suite", ["charfuncs", "commutant", "variance-oracle", "bounds"])
def test_suite_passes(suite):
    report = run_suite(suite, seed=2024, cases=20)
    assert report.checks, "suite ran no checks"
    assert report.passed, _failures(report)


@pytest.mark.slow
def test_omega_suite_passes():
    report = run_suite("omega", seed=2024, cases=20)
    assert report.passed, _failures(report)


@pytest.mark.slow
@pytest.mark.parametrize("suite", sorted(SUITES))
def test_suite_passes_at_full_size(suite):
    report = run_suite(suite)
    assert report.passed, _failures(report)


def test_unknown_suite():
    with pytest.raises(InvalidParameter):
        run_suite("nonsense")


def test_report_records_failures_as_data():
    report = SuiteReport(suite="demo", seed=0, cases=1)
    report.add_error("small", 1e-12, 1e-9)
    report.add_error("large", 1.0, 1e-9)
    report.add_flag("flag", True, measured=[1, 2])
    assert not report.passed
    assert [c.name for c in report.checks if not c.passed] == ["large"]
    assert report.checks[2].measured == [1, 2]
