import itertools

import pytest

from dswig.adjust import (
    RestrictionSet,
    Target,
    TemplateSpec,
    build_template,
    enumerate_vas,
    feasibility,
    minimal_sufficient_set,
    table1,
)
from dswig.dsl import parse_graph
from dswig.errors import AdjustError
from dswig.fixtures import load_fixture
from dswig.transform import Intervention, apply_swig

R_NOFB = RestrictionSet(
    swas_staggered=True, no_outcome_dynamics=True, no_within_period_dx=True, no_dx_feedback=True
)
R_FB = RestrictionSet(swas_staggered=True, no_outcome_dynamics=True, no_within_period_dx=True)


def edge_set(graph, skip_prefixes=("U_",)):
    return {
        (e.src, e.dst)
        for e in graph.edges
        if not any(e.src.startswith(p) or e.dst.startswith(p) for p in skip_prefixes)
    }


def test_template_matches_three_period_transcription():
    fixture = parse_graph(load_fixture("fig8_t3").graph_text)
    template = build_template(TemplateSpec(3, R_NOFB))
    assert edge_set(template) == edge_set(fixture)
    # separability labels agree as well
    for dst in ("Y0", "Y1", "Y2"):
        assert template.edge("U", dst).label == fixture.edge("U", dst).label


def test_template_feedback_adds_one_edge():
    fixture = parse_graph(load_fixture("fig8b_t3_feedback").graph_text)
    template = build_template(TemplateSpec(3, R_FB))
    assert edge_set(template) == edge_set(fixture)
    assert ("D1", "X2") in edge_set(template)


def test_template_t2_matches_time_varying_transcription():
    fixture = parse_graph(load_fixture("fig4_2x2_xt").graph_text)
    template = build_template(TemplateSpec(2, R_NOFB))
    renamed = {(a.replace("D1", "D"), b.replace("D1", "D")) for a, b in edge_set(template)}
    assert renamed == edge_set(fixture)


def test_template_validation():
    with pytest.raises(AdjustError):
        TemplateSpec(1)


def test_minimal_sets_three_periods():
    g = build_template(TemplateSpec(3, R_NOFB))
    s = apply_swig(g, Intervention.all_zero(g))
    assert minimal_sufficient_set(s, Target(1, 2)) == ("X0", "X1", "X2")
    assert minimal_sufficient_set(s, Target(2, 2)) == ("X0", "X1", "X2")
    assert minimal_sufficient_set(s, Target(2, 0)) == ("X0", "X1")


def test_minimal_set_feedback_contains_potential_covariate():
    g = build_template(TemplateSpec(3, R_FB))
    s = apply_swig(g, Intervention.all_zero(g))
    members = minimal_sufficient_set(s, Target(1, 2))
    assert members == ("X0", "X1", "X2")
    assert s.short_label("X2") == "X2(0)"
    feasible, _ = feasibility(members, Target(1, 2), s)
    assert not feasible
    feasible22, _ = feasibility(minimal_sufficient_set(s, Target(2, 2)), Target(2, 2), s)
    assert feasible22


def test_minimal_set_no_covariate_dynamics():
    fixture = parse_graph(load_fixture("fig9_t4").graph_text)
    s = apply_swig(fixture, Intervention.all_zero(fixture))
    assert minimal_sufficient_set(s, Target(2, 3)) == ("X1", "X3")
    assert minimal_sufficient_set(s, Target(2, 2)) == ("X1", "X2")


def test_minimal_set_requires_baseline_structure():
    # separability off
    g = build_template(TemplateSpec(3, RestrictionSet(no_outcome_dynamics=True)))
    s = apply_swig(g, Intervention.all_zero(g))
    with pytest.raises(AdjustError, match="separability"):
        minimal_sufficient_set(s, Target(1, 2))
    # outcome dynamics on
    g2 = build_template(TemplateSpec(3, RestrictionSet(swas_staggered=True)))
    s2 = apply_swig(g2, Intervention.all_zero(g2))
    with pytest.raises(AdjustError, match="outcome dynamics"):
        minimal_sufficient_set(s2, Target(1, 2))
    # not the all-zero fix
    g3 = build_template(TemplateSpec(3, R_NOFB))
    s3 = apply_swig(g3, {"D1": 0})
    with pytest.raises(AdjustError, match="all-zero"):
        minimal_sufficient_set(s3, Target(1, 2))


def test_feasibility_trivial_without_potential_members():
    g = build_template(TemplateSpec(3, R_NOFB))
    s = apply_swig(g, Intervention.all_zero(g))
    feasible, observable = feasibility(("X0", "X1"), Target(1, 1), s)
    assert feasible and observable == ("X0", "X1")


def test_target_validation():
    with pytest.raises(AdjustError):
        Target(0, 1)
    with pytest.raises(AdjustError):
        Target(1, 2, control="nyt", nyt_s=1)  # s < max(g-1, t)
    with pytest.raises(AdjustError):
        Target(1, 2, control="nyt")  # missing s
    with pytest.raises(AdjustError):
        Target(1, 2, nyt_s=2)  # s without nyt
    Target(1, 2, control="nyt", nyt_s=2)


def test_enumerate_vas_formula_family():
    g = build_template(TemplateSpec(3, R_NOFB))
    res = enumerate_vas(g, Target(1, 2), R_NOFB)
    assert res.feasible
    assert res.minimal_observable == ("X0", "X1", "X2")
    assert res.vas_family == {"kind": "interval", "lower": ["X0", "X1", "X2"], "upper": ["X0", "X1", "X2"]}


def test_enumerate_vas_no_baseline_is_none():
    r = RestrictionSet()
    g = build_template(TemplateSpec(3, r))
    res = enumerate_vas(g, Target(1, 2), r)
    assert not res.feasible
    assert res.vas_family == {"kind": "none"}


def test_enumerate_vas_empty_minimal_accepts_every_subset():
    r = RestrictionSet(
        swas_staggered=True,
        no_outcome_dynamics=True,
        no_xy_dynamics=True,
        no_within_period_xy=True,
    )
    g = build_template(TemplateSpec(3, r))
    formula = enumerate_vas(g, Target(1, 2), r)
    assert formula.minimal_observable == ()
    search = enumerate_vas(g, Target(1, 2), r, method="search")
    assert len(search.vas_family["sets"]) == 8  # every subset of {X0, X1, X2}


def test_search_agrees_with_formula_on_templates():
    for T in (3, 4):
        for r in (R_NOFB, R_FB):
            g = build_template(TemplateSpec(T, r))
            for gg in range(1, T):
                for t in range(T):
                    if t == gg - 1:
                        continue
                    target = Target(gg, t)
                    formula = enumerate_vas(g, target, r)
                    search = enumerate_vas(g, target, r, method="search")
                    if not formula.feasible:
                        assert search.vas_family == {"kind": "none"}
                        continue
                    lower = set(formula.minimal_observable)
                    upper = set(formula.vas_family["upper"])
                    expected = sorted(
                        [sorted(set(s)) for s in _interval_sets(lower, upper)]
                    )
                    got = sorted([sorted(s) for s in search.vas_family["sets"]])
                    assert got == expected, (T, r, gg, t)


def _interval_sets(lower, upper):
    extra = sorted(upper - lower)
    for k in range(len(extra) + 1):
        for combo in itertools.combinations(extra, k):
            yield lower | set(combo)


def test_nyt_minimal_sets_match_never_treated():
    g = build_template(TemplateSpec(4, R_NOFB))
    for gg, t in ((1, 2), (2, 2), (2, 3), (3, 1)):
        nt = enumerate_vas(g, Target(gg, t), R_NOFB)
        for s in range(max(gg - 1, t), 4):
            nyt = enumerate_vas(g, Target(gg, t, control="nyt", nyt_s=s), R_NOFB)
            assert nyt.minimal_observable == nt.minimal_observable
            assert nyt.feasible == nt.feasible


def test_nyt_search_agrees_too():
    g = build_template(TemplateSpec(3, R_NOFB))
    nt = enumerate_vas(g, Target(1, 2), R_NOFB, method="search")
    nyt = enumerate_vas(g, Target(1, 2, control="nyt", nyt_s=2), R_NOFB, method="search")
    assert nt.vas_family == nyt.vas_family


def test_minimality_of_formula_set():
    # dropping any member of the minimal set breaks the separation
    r = R_NOFB
    g = build_template(TemplateSpec(4, r))
    target = Target(1, 2)
    res = enumerate_vas(g, target, r)
    search = enumerate_vas(g, target, r, method="search")
    valid = {tuple(sorted(s)) for s in search.vas_family["sets"]}
    for member in res.minimal_observable:
        smaller = tuple(sorted(set(res.minimal_observable) - {member}))
        assert smaller not in valid


def test_degenerate_target_rejected():
    g = build_template(TemplateSpec(3, R_NOFB))
    with pytest.raises(AdjustError, match="degenerate"):
        enumerate_vas(g, Target(2, 1), R_NOFB)


def test_table_matches_reference_patterns():
    expected = {
        1: ("none", "none", "none"),
        2: ("Xbar[g-1]", "none", "none"),
        3: ("Xbar[g-1]", "Xbar[g]", "none"),
        4: ("Xbar[g-1]", "Xbar[g]", "Xbar[t]"),
        5: ("{X[t],X[g-1]}", "none", "none"),
        6: ("{X[t],X[g-1]}", "{X[g-1],X[g]}", "none"),
        7: ("{X[t],X[g-1]}", "{X[g-1],X[g]}", "{X[g-1],X[t]}"),
        8: ("{}", "{}", "{}"),
    }
    out = table1(4)
    for i, row in enumerate(out["rows"], start=1):
        assert (row["pre_trends"], row["short_term"], row["dynamic"]) == expected[i]


def test_table_insensitive_cells():
    # row 1: the treatment-covariate and covariate-outcome flags are
    # irrelevant once the baseline is off
    for flips in itertools.product((False, True), repeat=2):
        r = RestrictionSet(
            swas_staggered=False,
            no_outcome_dynamics=flips[0],
            no_within_period_dx=flips[1],
        )
        res = enumerate_vas(build_template(TemplateSpec(3, r)), Target(1, 2), r)
        assert res.vas_family == {"kind": "none"}
    # final row: the treatment-covariate flags do not change the empty set
    for dxt, dx1 in itertools.product((False, True), repeat=2):
        r = RestrictionSet(
            swas_staggered=True,
            no_outcome_dynamics=True,
            no_within_period_dx=dxt,
            no_dx_feedback=dx1,
            no_xy_dynamics=True,
            no_within_period_xy=True,
        )
        res = enumerate_vas(build_template(TemplateSpec(4, r)), Target(2, 3), r)
        assert res.minimal_observable == ()
        assert res.feasible


def test_table_needs_three_periods():
    with pytest.raises(AdjustError):
        table1(2)


def test_restriction_names_round_trip():
    r = RestrictionSet.from_names(["r-alpha", "r-y", "r-dx-t1"])
    assert r.swas_staggered and r.no_outcome_dynamics and r.no_dx_feedback
    assert not r.no_within_period_dx
    with pytest.raises(AdjustError, match="unknown restriction"):
        RestrictionSet.from_names(["r-bogus"])
