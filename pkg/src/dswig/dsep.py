"""d-separation queries over DAGs, SWIGs, and delta-SWIGs.

Two independent implementations are kept side by side: a linear-time
reachability pass over direction-tagged states (the production path), and a
literal path-enumeration oracle used to cross-check it on small graphs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import QueryError
from .graph import CausalGraph
from .transform import (
    FORM_CANONICAL,
    FORM_FIXED,
    DeltaSwig,
    GraphStage,
    Swig,
    stage_graph,
)

ORACLE_NODE_LIMIT = 20


@dataclass(frozen=True)
class DsepQuery:
    """Disjoint name sets; ``include_fixed`` adds every fixed split-node to
    the conditioning set, matching the ``given Z, d`` reading."""

    x: tuple[str, ...]
    y: tuple[str, ...]
    z: tuple[str, ...] = ()
    include_fixed: bool = True

    @staticmethod
    def of(x: Iterable[str], y: Iterable[str], z: Iterable[str] = (), include_fixed: bool = True) -> "DsepQuery":
        return DsepQuery(tuple(x), tuple(y), tuple(z), include_fixed)


def _resolve_set(stage: GraphStage, names: tuple[str, ...], what: str) -> list[tuple[str, str, str]]:
    """Resolve names to (id, form, name); duplicates are an error, not a dedup."""
    out: list[tuple[str, str, str]] = []
    seen: dict[str, str] = {}
    for name in names:
        if isinstance(stage, CausalGraph):
            stage.node(name)
            node_id, form = name, FORM_CANONICAL
        else:
            node_id, form = stage.resolve(name)
        if node_id in seen:
            raise QueryError(
                f"{what} set names node {node_id!r} twice (via {seen[node_id]!r} and {name!r})"
            )
        seen[node_id] = name
        out.append((node_id, form, name))
    return out


def _resolve_query(stage: GraphStage, query: DsepQuery):
    xs = _resolve_set(stage, query.x, "x")
    ys = _resolve_set(stage, query.y, "y")
    zs = _resolve_set(stage, query.z, "z")
    if not xs or not ys:
        raise QueryError("query needs nonempty x and y sets")
    x_ids = {i for i, _, _ in xs}
    y_ids = {i for i, _, _ in ys}
    z_ids = {i for i, _, _ in zs}
    for a, b, la, lb in ((x_ids, y_ids, "x", "y"), (x_ids, z_ids, "x", "z"), (y_ids, z_ids, "y", "z")):
        overlap = a & b
        if overlap:
            raise QueryError(f"{la} and {lb} sets overlap on {sorted(overlap)}")
    if query.include_fixed and not isinstance(stage, CausalGraph):
        z_ids |= set(stage.fixed_ids()) - x_ids - y_ids
    return xs, ys, zs, x_ids, y_ids, z_ids


def _reachable(graph: CausalGraph, sources: set[str], z: set[str]) -> dict[tuple[str, str], tuple[str, str] | None]:
    """Direction-tagged reachability: returns the visited state set as a
    predecessor map (state -> previous state), for witness reconstruction.

    State (v, "up") means the trail reached v moving against an arrow (from a
    child); (v, "down") means it arrived along an arrow (from a parent).
    """
    an_z = graph.ancestors_of_set(z) if z else set()
    pred: dict[tuple[str, str], tuple[str, str] | None] = {}
    stack: list[tuple[str, str]] = []
    for s in sorted(sources):
        state = (s, "up")
        pred[state] = None
        stack.append(state)
    while stack:
        v, direction = state = stack.pop()
        if direction == "up" and v not in z:
            nxt = [(p, "up") for p in graph.parents(v)]
            nxt += [(c, "down") for c in graph.children(v)]
        elif direction == "down":
            nxt = []
            if v not in z:
                nxt += [(c, "down") for c in graph.children(v)]
            if v in an_z:
                nxt += [(p, "up") for p in graph.parents(v)]
        else:
            nxt = []
        for ns in nxt:
            if ns not in pred:
                pred[ns] = state
                stack.append(ns)
    return pred


def d_separated(stage: GraphStage, query: DsepQuery) -> bool:
    """True iff every path between the x and y sets is blocked given z
    (plus the fixed nodes when ``include_fixed``)."""
    _, _, _, x_ids, y_ids, z_ids = _resolve_query(stage, query)
    graph = stage_graph(stage)
    visited = _reachable(graph, x_ids, z_ids)
    reached = {v for (v, _) in visited}
    return not (reached & y_ids)


def _skeleton_paths(graph: CausalGraph, src: str, dst: str):
    """Yield every simple path in the undirected skeleton from src to dst."""
    neighbors: dict[str, list[str]] = {n.id: [] for n in graph.nodes}
    for e in graph.edges:
        neighbors[e.src].append(e.dst)
        neighbors[e.dst].append(e.src)
    neighbors = {k: sorted(set(v)) for k, v in neighbors.items()}

    path = [src]
    on_path = {src}

    def walk(v: str):
        if v == dst:
            yield list(path)
            return
        for w in neighbors[v]:
            if w in on_path:
                continue
            path.append(w)
            on_path.add(w)
            yield from walk(w)
            path.pop()
            on_path.remove(w)

    yield from walk(src)


def _path_block_reason(graph: CausalGraph, path: list[str], z: set[str]) -> tuple[str, str] | None:
    """First blocking (node, reason) on the path, or None when open."""
    for i in range(1, len(path) - 1):
        a, v, b = path[i - 1], path[i], path[i + 1]
        is_collider = graph.edge(a, v) is not None and graph.edge(b, v) is not None
        if is_collider:
            if v not in z and not (graph.descendants(v) & z):
                return v, "collider not conditioned (and no conditioned descendant)"
        else:
            if v in z:
                return v, "non-collider conditioned"
    return None


def d_separated_oracle(stage: GraphStage, query: DsepQuery) -> bool:
    """Literal Definition-style check: enumerate every simple skeleton path
    and apply the blocking rules. Exhaustive, so limited to small graphs."""
    _, _, _, x_ids, y_ids, z_ids = _resolve_query(stage, query)
    graph = stage_graph(stage)
    if len(graph.nodes) > ORACLE_NODE_LIMIT:
        raise QueryError(
            f"oracle limited to {ORACLE_NODE_LIMIT} nodes, graph has {len(graph.nodes)}"
        )
    for src in sorted(x_ids):
        for dst in sorted(y_ids):
            for path in _skeleton_paths(graph, src, dst):
                if _path_block_reason(graph, path, z_ids) is None:
                    return False
    return True


def implied_ci(stage: GraphStage, query: DsepQuery) -> bool:
    """Whether the graph implies conditional independence of the *variables
    named in the query*, not just separation of the nodes.

    Runs d-separation with fixed nodes conditioned, after an observability
    layer: a name given in canonical (observable) form that resolves to a
    genuine potential node stands for a different random variable than the
    node unless consistency lets the two coincide. That requires every
    treatment ancestor of the node to be pinned by the conditioning set;
    treatment nodes queried as subjects may instead lean on fellow queried
    treatments, which matches the staggered sequence contraction argument.
    """
    query = DsepQuery(query.x, query.y, query.z, include_fixed=True)
    xs, ys, zs, x_ids, y_ids, z_ids_all = _resolve_query(stage, query)
    if isinstance(stage, CausalGraph):
        return d_separated(stage, query)

    swig = stage.swig if isinstance(stage, DeltaSwig) else stage
    source = swig.source
    delta_ids = stage.delta_ids() if isinstance(stage, DeltaSwig) else frozenset()
    intervened = set(swig.intervention.treatment_ids)

    z_treatments = {i for i, _, _ in zs if i in intervened}
    subject_treatments = {i for i, _, _ in list(xs) + list(ys) if i in intervened}

    for node_id, form, _name in xs + ys + zs:
        if form != FORM_CANONICAL or node_id in delta_ids:
            continue
        if not stage.is_potential(node_id):
            continue
        ancestors = source.treatment_ancestors(node_id)
        allowed = set(z_treatments)
        if node_id in intervened and (node_id in x_ids or node_id in y_ids):
            allowed |= subject_treatments
        if not ancestors <= allowed:
            return False
    return d_separated(stage, query)


def _first_open_path(graph: CausalGraph, x_ids: set[str], y_ids: set[str], z: set[str],
                     budget: int = 200_000) -> list[str] | None:
    """Depth-first search for one unblocked simple path, with a step budget."""
    steps = 0
    for src in sorted(x_ids):
        for dst in sorted(y_ids):
            for path in _skeleton_paths(graph, src, dst):
                steps += 1
                if steps > budget:
                    return None
                if _path_block_reason(graph, path, z) is None:
                    return path
    return None


def explain(stage: GraphStage, query: DsepQuery) -> dict:
    """Verdict plus path evidence for interactive use.

    When connected, includes one unblocked witness path. On graphs small
    enough for enumeration, also lists every x-y path with its blocking
    node and reason.
    """
    _, _, _, x_ids, y_ids, z_ids = _resolve_query(stage, query)
    graph = stage_graph(stage)
    visited = _reachable(graph, x_ids, z_ids)
    reached = {v for (v, _) in visited}
    separated = not (reached & y_ids)
    out: dict = {"separated": separated}

    if len(graph.nodes) <= ORACLE_NODE_LIMIT:
        paths = []
        witness: list[str] | None = None
        for src in sorted(x_ids):
            for dst in sorted(y_ids):
                for path in _skeleton_paths(graph, src, dst):
                    reason = _path_block_reason(graph, path, z_ids)
                    entry: dict = {"nodes": path, "open": reason is None}
                    if reason is None:
                        witness = witness or path
                    else:
                        entry["blocked_by"] = reason[0]
                        entry["reason"] = reason[1]
                    paths.append(entry)
        out["paths"] = paths
        if witness is not None:
            out["witness"] = witness
        if separated == (witness is not None):  # pragma: no cover - consistency guard
            raise QueryError("internal disagreement between reachability and path enumeration")
    elif not separated:
        witness = _first_open_path(graph, x_ids, y_ids, z_ids)
        if witness is not None:
            out["witness"] = witness
    return out
