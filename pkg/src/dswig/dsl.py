"""Line-oriented DSL for graphs and transform pipelines, plus the
d-separation query mini-syntax.

Graph statements::

    graph fig2a
    # comment
    node U kind=exogenous role=confounder
    node Y1 role=outcome t=1
    edge U -> Y1 label=alpha0:a

Pipeline statements (may follow the graph in the same ``.dswig`` file)::

    fix D1=0 D2=0
    delta dY1 = Y1 - Y0
    prune keep=dY1,D1,X0,X1,U

Query mini-syntax: ``"dY1 _||_ D | X0, X1"`` (conditioning part optional).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError
from .graph import CausalGraph, Edge, EdgeLabel, Node

_BOOL = {"true": True, "false": False}


@dataclass(frozen=True)
class FixStmt:
    assignments: tuple[tuple[str, int], ...]
    relabel: bool = True


@dataclass(frozen=True)
class DeltaStmt:
    name: str
    minuend: str
    subtrahend: str


@dataclass(frozen=True)
class PruneStmt:
    keep: tuple[str, ...]


PipelineStmt = FixStmt | DeltaStmt | PruneStmt


@dataclass
class Document:
    """A parsed ``.dswig`` file: one graph and an optional pipeline."""

    graph: CausalGraph
    pipeline: list[PipelineStmt] = field(default_factory=list)


def _split_kv(token: str, line_no: int) -> tuple[str, str]:
    if "=" not in token:
        raise ParseError(f"expected key=value, got {token!r}", line_no)
    key, _, value = token.partition("=")
    if not key or not value:
        raise ParseError(f"malformed key=value {token!r}", line_no)
    return key, value


def _parse_node(tokens: list[str], line_no: int) -> Node:
    if not tokens:
        raise ParseError("node statement needs an id", line_no)
    node_id = tokens[0]
    kind = "endogenous"
    role = "other"
    t: int | None = None
    observed: bool | None = None
    for token in tokens[1:]:
        key, value = _split_kv(token, line_no)
        if key == "kind":
            kind = value
        elif key == "role":
            role = value
        elif key == "t":
            try:
                t = int(value)
            except ValueError:
                raise ParseError(f"t must be an integer, got {value!r}", line_no) from None
        elif key == "observed":
            if value not in _BOOL:
                raise ParseError(f"observed must be true or false, got {value!r}", line_no)
            observed = _BOOL[value]
        else:
            raise ParseError(f"unknown node attribute {key!r}", line_no)
    if observed is None:
        # Convention: exogenous and confounder nodes are latent unless said otherwise.
        observed = not (kind == "exogenous" or role == "confounder")
    try:
        return Node(node_id, kind=kind, role=role, t=t, observed=observed)
    except Exception as exc:
        raise ParseError(str(exc), line_no) from None


def _parse_edge(tokens: list[str], line_no: int) -> Edge:
    if len(tokens) < 3 or tokens[1] != "->":
        raise ParseError("edge statement must look like: edge A -> B [label=...]", line_no)
    src, dst = tokens[0], tokens[2]
    label = EdgeLabel.plain()
    for token in tokens[3:]:
        key, value = _split_kv(token, line_no)
        if key != "label":
            raise ParseError(f"unknown edge attribute {key!r}", line_no)
        kind, _, tag = value.partition(":")
        if kind == "alpha":
            label = EdgeLabel.alpha(tag)
        elif kind == "alpha0":
            label = EdgeLabel.alpha0(tag)
        else:
            raise ParseError(f"unknown edge label {value!r} (want alpha:<tag> or alpha0:<tag>)", line_no)
    try:
        return Edge(src, dst, label)
    except Exception as exc:
        raise ParseError(str(exc), line_no) from None


def _parse_fix(tokens: list[str], line_no: int) -> FixStmt:
    if not tokens:
        raise ParseError("fix statement needs at least one assignment", line_no)
    assignments: list[tuple[str, int]] = []
    relabel = True
    for token in tokens:
        key, value = _split_kv(token, line_no)
        if key == "relabel":
            if value not in _BOOL:
                raise ParseError(f"relabel must be true or false, got {value!r}", line_no)
            relabel = _BOOL[value]
            continue
        if value not in ("0", "1"):
            raise ParseError(f"treatments can only be fixed to 0 or 1, got {token!r}", line_no)
        assignments.append((key, int(value)))
    if not assignments:
        raise ParseError("fix statement needs at least one treatment assignment", line_no)
    return FixStmt(tuple(assignments), relabel)


def _parse_delta(tokens: list[str], line_no: int) -> DeltaStmt:
    # delta <name> = <minuend> - <subtrahend>
    if len(tokens) != 5 or tokens[1] != "=" or tokens[3] != "-":
        raise ParseError("delta statement must look like: delta dY1 = Y1 - Y0", line_no)
    return DeltaStmt(tokens[0], tokens[2], tokens[4])


def _parse_prune(tokens: list[str], line_no: int) -> PruneStmt:
    if len(tokens) != 1:
        raise ParseError("prune statement must look like: prune keep=a,b,c", line_no)
    key, value = _split_kv(tokens[0], line_no)
    if key != "keep":
        raise ParseError(f"unknown prune attribute {key!r}", line_no)
    keep = tuple(split_names(value))
    if not keep:
        raise ParseError("prune keep list is empty", line_no)
    return PruneStmt(keep)


def parse_document(text: str, name: str = "g") -> Document:
    """Parse a full ``.dswig`` file (graph plus optional pipeline)."""
    graph_name = name
    nodes: list[Node] = []
    edges: list[Edge] = []
    pipeline: list[PipelineStmt] = []
    node_lines: dict[str, int] = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        stmt, args = tokens[0], tokens[1:]
        if stmt == "graph":
            if len(args) != 1:
                raise ParseError("graph statement needs exactly one name", line_no)
            graph_name = args[0]
        elif stmt == "node":
            node = _parse_node(args, line_no)
            if node.id in node_lines:
                raise ParseError(
                    f"duplicate node {node.id!r} (first declared on line {node_lines[node.id]})", line_no
                )
            node_lines[node.id] = line_no
            nodes.append(node)
        elif stmt == "edge":
            edges.append(_parse_edge(args, line_no))
        elif stmt == "fix":
            pipeline.append(_parse_fix(args, line_no))
        elif stmt == "delta":
            pipeline.append(_parse_delta(args, line_no))
        elif stmt == "prune":
            pipeline.append(_parse_prune(args, line_no))
        else:
            raise ParseError(f"unknown statement {stmt!r}", line_no)

    try:
        graph = CausalGraph(nodes, edges, name=graph_name)
    except Exception as exc:
        raise ParseError(str(exc)) from None
    return Document(graph, pipeline)


def parse_graph(text: str, name: str = "g") -> CausalGraph:
    """Parse DSL source into a validated :class:`CausalGraph`.

    Pipeline statements are rejected here; use :func:`parse_document` for
    files that drive transforms.
    """
    doc = parse_document(text, name=name)
    if doc.pipeline:
        raise ParseError("unexpected pipeline statement in a graph-only context")
    return doc.graph


def serialize_graph(graph: CausalGraph) -> str:
    """Emit the canonical DSL form (nodes and edges in lexicographic order)."""
    lines = [f"graph {graph.name}"]
    for n in graph.nodes:
        parts = [f"node {n.id}"]
        if n.kind != "endogenous":
            parts.append(f"kind={n.kind}")
        if n.role != "other":
            parts.append(f"role={n.role}")
        if n.t is not None:
            parts.append(f"t={n.t}")
        default_observed = not (n.kind == "exogenous" or n.role == "confounder")
        if n.observed != default_observed:
            parts.append(f"observed={'true' if n.observed else 'false'}")
        lines.append(" ".join(parts))
    for e in graph.edges:
        suffix = ""
        if e.label.kind != "plain":
            suffix = f" label={e.label.kind}:{e.label.tag}"
        lines.append(f"edge {e.src} -> {e.dst}{suffix}")
    return "\n".join(lines) + "\n"


def split_names(text: str) -> list[str]:
    """Split a comma-separated name list, ignoring commas inside parentheses
    (potential-variable aliases like ``Y2(0,0)`` are single names)."""
    out: list[str] = []
    depth = 0
    current: list[str] = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        if ch == "," and depth == 0:
            out.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
    out.append("".join(current).strip())
    return [name for name in out if name]


def parse_query(text: str) -> tuple[list[str], list[str], list[str]]:
    """Parse ``"A, B _||_ C | Z1, Z2"`` into (x, y, z) name lists."""
    if "_||_" not in text:
        raise ParseError("query must contain the independence symbol _||_")
    lhs, _, rest = text.partition("_||_")
    if "|" in rest:
        mid, _, cond = rest.partition("|")
    else:
        mid, cond = rest, ""

    def names(chunk: str, what: str, required: bool) -> list[str]:
        out = split_names(chunk)
        if required and not out:
            raise ParseError(f"query is missing the {what} side")
        return out

    return names(lhs, "left", True), names(mid, "right", True), names(cond, "conditioning", False)
