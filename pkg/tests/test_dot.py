from dswig.dot import to_dot
from dswig.dsl import parse_document, parse_graph
from dswig.graph import CausalGraph
from dswig.transform import run_pipeline


def test_empty_graph_is_valid_digraph():
    out = to_dot(CausalGraph([], [], name="empty"))
    assert out.startswith('digraph "empty" {')
    assert out.rstrip().endswith("}")


def test_serialization_is_deterministic(fig2_case):
    g = parse_graph(fig2_case.graph_text)
    assert to_dot(g) == to_dot(g)
    doc = parse_document(fig2_case.graph_text + "\n" + fig2_case.pipeline_text)
    stage = run_pipeline(doc.graph, doc.pipeline)
    assert to_dot(stage) == to_dot(stage)


def test_unobserved_nodes_lose_border(fig2_case):
    out = to_dot(parse_graph(fig2_case.graph_text))
    assert '"U" [peripheries=0];' in out


def test_alpha_edges_annotated(fig2_case):
    out = to_dot(parse_graph(fig2_case.graph_text))
    assert '"U" -> "Y0" [label="+α"]' in out
    # the conditional label is not printed on the observable-world diagram
    assert '"U" -> "Y1" [tooltip=' in out


def test_pruned_two_period_panel_rendering(fig2_case):
    doc = parse_document(fig2_case.graph_text + "\n" + fig2_case.pipeline_text)
    stage = run_pipeline(doc.graph, doc.pipeline)
    out = to_dot(stage)
    # the four visible random nodes plus the fixed part inside the record
    assert '"ΔY1(0)"' in out or "ΔY1(0)" in out
    assert '<TD PORT="r">D</TD>' in out and '<TD BORDER="1" SIDES="L" PORT="f">0</TD>' in out
    assert '"X"' in out and '"U"' in out
    # suppressed disturbances are not rendered
    assert '"U_Y0"' not in out and '"U_Y1"' not in out


def test_gray_redundant_suffix(fig8_case):
    doc = parse_document(fig8_case.graph_text + "\nfix D1=0 D2=0")
    stage = run_pipeline(doc.graph, doc.pipeline)
    out = to_dot(stage)
    assert 'Y1(0,<FONT COLOR="gray">0</FONT>)' in out
    assert '"Y2" [label="Y2(0,0)"]' in out
