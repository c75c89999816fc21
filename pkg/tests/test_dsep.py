import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_dag, random_disjoint_sets
from dswig.dsep import DsepQuery, d_separated, d_separated_oracle, explain, implied_ci
from dswig.dsl import parse_document, parse_graph
from dswig.errors import QueryError
from dswig.fixtures import load_fixture
from dswig.graph import CausalGraph, Edge, Node
from dswig.transform import DeltaSpec, add_difference, apply_swig, run_pipeline


def final_stage(case):
    doc = parse_document(case.graph_text + "\n" + (case.pipeline_text or ""))
    return run_pipeline(doc.graph, doc.pipeline)


def q(x, y, z=(), include_fixed=True):
    return DsepQuery.of([x] if isinstance(x, str) else x, [y] if isinstance(y, str) else y, z, include_fixed)


def test_chain_blocking():
    g = parse_graph("node A\nnode B\nnode C\nedge A -> B\nedge B -> C")
    assert d_separated(g, q("A", "C", ["B"]))
    assert not d_separated(g, q("A", "C"))


def test_collider_behavior():
    g = parse_graph("node A\nnode B\nnode C\nnode D\nedge A -> C\nedge B -> C\nedge C -> D")
    assert d_separated(g, q("A", "B"))
    assert not d_separated(g, q("A", "B", ["C"]))
    assert not d_separated(g, q("A", "B", ["D"]))  # conditioned descendant activates


def test_two_period_panel_query(fig2_case):
    stage = final_stage(fig2_case)
    assert d_separated(stage, q("dY1", "D", ["X"]))
    assert not d_separated(stage, q("dY1", "D"))


def test_time_varying_covariates_queries():
    stage = final_stage(load_fixture("fig4_2x2_xt"))
    assert not d_separated(stage, q("dY1", "D", ["X0"]))
    assert d_separated(stage, q("dY1", "D", ["X0", "X1"]))


def test_state_dependence_has_no_separating_set():
    stage = final_stage(load_fixture("fig5_state_dependence"))
    import itertools

    for k in range(4):
        for z in itertools.combinations(["X0", "X1", "Y0"], k):
            assert not d_separated(stage, q("dY1", "D", z))


def test_worked_example_triple():
    g = parse_graph(load_fixture("b1_dsep_example").graph_text)
    assert d_separated(g, q("X", "Y", ["A", "B"]))
    assert not d_separated(g, q("X", "Y", ["A", "B", "C"]))
    assert d_separated(g, q("X", "Y", ["A", "B", "C", "D"]))
    assert d_separated(g, q("X", "Y", ["A", "B", "D"]))


def test_three_period_joint_queries():
    stage = final_stage(load_fixture("fig8_t3"))
    assert implied_ci(stage, q("dY2", ["D1", "D2(0)"], ["X0", "X1", "X2"]))
    assert implied_ci(stage, q("dY1", ["D1", "D2(0)"], ["X0", "X1"]))
    assert not implied_ci(stage, q("dY2", "D1", ["X0", "X1"]))


def test_feedback_wrong_world_alias():
    stage = final_stage(load_fixture("fig8b_t3_feedback"))
    # potential form separates...
    assert implied_ci(stage, q("dY2", ["D1"], ["X0", "X1", "X2(0)"]))
    # ...the observable alias does not carry the independence
    assert not implied_ci(stage, q("dY2", ["D1"], ["X0", "X1", "X2"]))
    # but it is fine once the feedback source is conditioned
    assert implied_ci(stage, q("dY2", ["D2"], ["X0", "X1", "X2", "D1"]))
    # pure node-level separation ignores observability
    assert d_separated(stage, q("dY2", ["D1"], ["X0", "X1", "X2"]))


def test_post_treatment_covariate_unconfoundedness():
    with_latent = final_stage(load_fixture("fig7_post_treatment"))
    assert not implied_ci(with_latent, q("X1(0)", "D", ["X0"]))
    without_latent = final_stage(load_fixture("fig7_exogenous_covariate"))
    assert implied_ci(without_latent, q("X1(0)", "D", ["X0"]))
    assert implied_ci(without_latent, q("X1(0)", "D", ["X0", "Y0"]))


def test_include_fixed_matters():
    stage = final_stage(load_fixture("fig8_t3"))
    # the first fixed split-part is a fork parent of the later treatment and
    # the first difference node; only conditioning on it blocks that path.
    query_on = q("D2(0)", "dY1", ["X0", "X1", "X2", "U"], include_fixed=True)
    query_off = q("D2(0)", "dY1", ["X0", "X1", "X2", "U"], include_fixed=False)
    assert d_separated(stage, query_on)
    assert not d_separated(stage, query_off)


def test_query_validation(fig2_case):
    stage = final_stage(fig2_case)
    with pytest.raises(QueryError, match="overlap"):
        d_separated(stage, q("dY1", "dY1"))
    with pytest.raises(QueryError, match="twice"):
        d_separated(stage, DsepQuery.of(["dY1", "ΔY1(0)"], ["D"], ()))
    with pytest.raises(QueryError, match="nonempty"):
        d_separated(stage, DsepQuery.of([], ["D"], ()))
    with pytest.raises(Exception, match="unknown node"):
        d_separated(stage, q("nope", "D"))


def test_symmetry_random():
    rng = np.random.default_rng(7)
    for _ in range(200):
        g = random_dag(rng, n=8, p=0.3)
        x, y, z = random_disjoint_sets(rng, list(g.node_ids()))
        assert d_separated(g, DsepQuery.of(x, y, z)) == d_separated(g, DsepQuery.of(y, x, z))


def test_monotone_blocking_without_colliders():
    # chains and forks only: supersets of a separating set keep separating
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = 7
        nodes = [Node(f"N{i}") for i in range(n)]
        edges = [Edge(f"N{i}", f"N{i+1}") for i in range(n - 1)]  # one chain: no colliders
        g = CausalGraph(nodes, edges)
        mid = [f"N{i}" for i in range(1, n - 1)]
        base = [mid[int(rng.integers(len(mid)))]]
        assert d_separated(g, DsepQuery.of(["N0"], [f"N{n-1}"], base))
        extra = [m for m in mid if m not in base and rng.random() < 0.5]
        assert d_separated(g, DsepQuery.of(["N0"], [f"N{n-1}"], base + extra))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_oracle_agreement(seed):
    rng = np.random.default_rng(seed)
    g = random_dag(rng, n=int(rng.integers(3, 11)), p=0.3)
    for _ in range(5):
        x, y, z = random_disjoint_sets(rng, list(g.node_ids()))
        query = DsepQuery.of(x, y, z)
        assert d_separated(g, query) == d_separated_oracle(g, query)


def test_oracle_node_guard():
    g = random_dag(np.random.default_rng(0), n=25, p=0.1)
    with pytest.raises(QueryError, match="oracle"):
        d_separated_oracle(g, q("N0", "N24"))


def test_explain_witness_and_paths(fig2_case):
    stage = final_stage(fig2_case)
    open_result = explain(stage, q("dY1", "D"))
    assert not open_result["separated"]
    assert open_result["witness"][0] == "dY1" and open_result["witness"][-1] == "D"
    closed = explain(stage, q("dY1", "D", ["X"]))
    assert closed["separated"]
    assert all(not p["open"] for p in closed["paths"])
    assert all("blocked_by" in p for p in closed["paths"])


def test_implied_ci_forces_fixed_conditioning():
    stage = final_stage(load_fixture("fig8_t3"))
    # even with include_fixed=False requested, the CI reading conditions on
    # the fixed nodes
    query = DsepQuery.of(["D2(0)"], ["dY1"], ["X0", "X1", "X2", "U"], include_fixed=False)
    assert not d_separated(stage, query)
    assert implied_ci(stage, query)


def test_delta_alias_queryable(fig2_case):
    stage = final_stage(fig2_case)
    assert d_separated(stage, q("ΔY1(0)", "D", ["X"]))
