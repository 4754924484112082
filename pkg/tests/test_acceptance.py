"""Acceptance gate: one test and one printed PASS/FAIL line per criterion."""
import pytest

from mm_rigidity import acceptance as acc

RESULTS: list[acc.Criterion] = []


@pytest.fixture(scope="module")
def sweep_rows():
    return acc.sweep_table()


def check(number, name, limit, fn):
    c = acc._timed(number, name, limit, fn)
    RESULTS.append(c)
    print(c.line())
    assert c.passed, c.line()


def test_criterion_01_closed_forms():
    check(1, "spherical closed forms", 1.0, acc.c1_closed_forms)


def test_criterion_02_closed_vs_quadrature():
    check(2, "closed form vs quadrature", 5.0, acc.c2_closed_vs_quadrature)


def test_criterion_03_recurrence():
    check(3, "recurrence identity and bound", None, acc.c3_recurrence_identity)


def test_criterion_04_asymptotic():
    check(4, "asymptotic N*value -> 1", 1.0, acc.c4_asymptotic)


def test_criterion_05_quantiles():
    check(5, "quantile machinery", 10.0, acc.c5_quantile_machinery)


def test_criterion_06_domination():
    check(6, "domination", 5.0, acc.c6_domination)


def test_criterion_07_obsvar_bound():
    # the sweep itself is timed here, not in the shared fixture
    check(7, "ObsVar <= Var(nu) on path sweeps", 60.0, lambda: acc.c7_obsvar_bound(acc.sweep_table()))


def test_criterion_08_oracle_equivalence():
    check(8, "maximizer vs exhaustive oracle", 120.0, acc.c8_oracle_equivalence)


def test_criterion_09_foliation():
    check(9, "foliation predicate", None, acc.c9_foliation)


def test_criterion_10_diameter(sweep_rows):
    check(10, "diameter check", None, lambda: acc.c10_diameter(sweep_rows))


def test_criterion_11_spectral():
    check(11, "spectral inequality", None, acc.c11_spectral)


def test_criterion_12_cheeger():
    check(12, "Cheeger pipeline", 30.0, acc.c12_cheeger)
