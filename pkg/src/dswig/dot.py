"""Deterministic DOT export for every graph stage.

Rendering conventions follow the figures this engine reproduces:
unobservable nodes lose their border, additively separable edges carry a
``+α`` annotation, split treatments become two-part records (random part
left, fixed value right), redundant relabel suffix positions render gray,
and single-child exogenous disturbances suppressed by pruning are omitted.
"""

from __future__ import annotations

from html import escape

from .graph import CausalGraph, Node
from .transform import DeltaSwig, GraphStage, Swig


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _label_html(node_id: str, stage: GraphStage) -> str | None:
    """HTML-ish label with gray redundant suffix, or None when plain."""
    if isinstance(stage, CausalGraph):
        return None
    swig = stage.swig if isinstance(stage, DeltaSwig) else stage
    values = swig.suffix.get(node_id)
    if values is None:
        return None
    red = set(swig.redundant.get(node_id, ()))
    if not red:
        return None
    parts = [escape(node_id), "("]
    for i, v in enumerate(values):
        if i:
            parts.append(",")
        if i in red:
            parts.append(f'<FONT COLOR="gray">{v}</FONT>')
        else:
            parts.append(str(v))
    parts.append(")")
    return "".join(parts)


def _display(node_id: str, stage: GraphStage) -> str:
    if isinstance(stage, CausalGraph):
        return node_id
    return stage.display_label(node_id)


def to_dot(stage: GraphStage) -> str:
    """Serialize a DAG, SWIG, or delta-SWIG stage to DOT text.

    Output is byte-deterministic for a given stage: nodes and edges are
    emitted in the graph's canonical (sorted) order.
    """
    graph = stage if isinstance(stage, CausalGraph) else stage.graph
    swig = None
    suppressed: frozenset[str] = frozenset()
    split_pairs: dict[str, str] = {}
    if isinstance(stage, (Swig, DeltaSwig)):
        swig = stage.swig if isinstance(stage, DeltaSwig) else stage
        if isinstance(stage, DeltaSwig):
            suppressed = stage.suppressed
        split_pairs = {
            tid: fid
            for tid, fid in swig.split.items()
            if tid in graph and fid in graph
        }
    fixed_in_record = set(split_pairs.values())

    lines = [f"digraph {_quote(graph.name)} {{", "  rankdir=TB;", '  node [shape=ellipse];']

    def node_line(node: Node) -> str:
        attrs: list[str] = []
        if node.id in split_pairs:
            value = split_pairs[node.id].rsplit("=", 1)[1]
            html = _label_html(node.id, stage) or escape(_display(node.id, stage))
            attrs.append("shape=plaintext")
            attrs.append(
                "label=<"
                '<TABLE BORDER="1" CELLBORDER="0" CELLSPACING="0" CELLPADDING="4">'
                f'<TR><TD PORT="r">{html}</TD><TD BORDER="1" SIDES="L" PORT="f">{value}</TD></TR>'
                "</TABLE>>"
            )
        else:
            html = _label_html(node.id, stage)
            if html is not None:
                attrs.append(f"label=<{html}>")
            else:
                label = _display(node.id, stage)
                if label != node.id:
                    attrs.append(f"label={_quote(label)}")
            if not node.observed:
                attrs.append("peripheries=0")
            if node.kind == "fixed":
                attrs.append("shape=box")
        return f"  {_quote(node.id)}" + (f" [{', '.join(attrs)}];" if attrs else ";")

    for node in graph.nodes:
        if node.id in suppressed or node.id in fixed_in_record:
            continue
        lines.append(node_line(node))

    def endpoint(node_id: str, side: str) -> str:
        if swig is not None:
            if node_id in split_pairs and side == "tail":
                return f"{_quote(node_id)}:r"
            for tid, fid in split_pairs.items():
                if fid == node_id:
                    return f"{_quote(tid)}:f"
        return _quote(node_id)

    for e in graph.edges:
        if e.src in suppressed or e.dst in suppressed:
            continue
        attrs = []
        if e.label.kind == "alpha":
            attrs.append('label="+α"')
        elif e.label.kind == "alpha0":
            attrs.append(f'tooltip="separable in the all-zero world ({e.label.tag})"')
        head = (
            f"{_quote(e.dst)}:r"
            if e.dst in split_pairs
            else endpoint(e.dst, "head")
        )
        line = f"  {endpoint(e.src, 'tail')} -> {head}"
        if attrs:
            line += f" [{', '.join(attrs)}]"
        lines.append(line + ";")

    lines.append("}")
    return "\n".join(lines) + "\n"
