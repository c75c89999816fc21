import pytest

from dswig.fixtures import list_fixtures, load_fixture, run_all, run_fixture


def test_corpus_is_present():
    names = list_fixtures()
    assert len(names) >= 12
    assert "fig2_2x2" in names and "fig8_t3" in names and "b1_dsep_example" in names


@pytest.mark.parametrize("name", list_fixtures())
def test_fixture_passes(name):
    report = run_fixture(load_fixture(name))
    assert report.passed, [c.cite + ": " + c.detail for c in report.failures()]


def test_every_fixture_carries_citations():
    for name in list_fixtures():
        case = load_fixture(name)
        report = run_fixture(case)
        assert report.checks, name
        for spec in case.expect.get("queries", []):
            assert spec.get("cite"), (name, spec["q"])


def test_coverage_of_claimed_verdicts():
    """The central worked claims each live in at least one fixture."""
    wanted = {
        "fig2_2x2": "dY1 _||_ D | X",
        "fig4_2x2_xt": "dY1 _||_ D | X0, X1",
        "fig8_t3": "dY1 _||_ D1 | X0, X1",
        "fig8b_t3_feedback": "dY2 _||_ D1 | X0, X1, X2",
        "fig7_post_treatment": "dY1 _||_ D | X0, X1(0)",
        "b1_dsep_example": "X _||_ Y | A, B, C, D",
    }
    for name, query in wanted.items():
        case = load_fixture(name)
        assert any(spec["q"] == query for spec in case.expect["queries"]), (name, query)


def test_report_serialization():
    report = run_fixture(load_fixture("trivial_isolated"))
    data = report.to_json()
    assert data["passed"] is True
    assert data["checks"][0]["cite"]
