"""Annotated causal DAGs: nodes, labeled edges, and graph primitives.

A :class:`CausalGraph` is an immutable, validated DAG. Nodes carry a kind
(endogenous / exogenous / fixed), an optional time-indexed role, and an
observability flag; edges carry a separability label used by the
difference-node cancellation logic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import GraphError

NODE_KINDS = ("endogenous", "exogenous", "fixed")
NODE_ROLES = ("outcome", "covariate", "treatment", "confounder", "other")
LABEL_KINDS = ("plain", "alpha", "alpha0")

# Characters that would collide with the query / DSL syntax.
_FORBIDDEN_IN_ID = set(" \t\r\n,|")


@dataclass(frozen=True)
class EdgeLabel:
    """Separability annotation on an edge.

    ``alpha`` marks an additively separable channel (tagged by function
    name); ``alpha0`` marks a channel that becomes separable only in the
    all-zero-treatment world, resolving to ``alpha`` once every treatment
    ancestor of the edge head is fixed to zero.
    """

    kind: str = "plain"
    tag: str | None = None

    def __post_init__(self):
        if self.kind not in LABEL_KINDS:
            raise GraphError(f"unknown edge label kind {self.kind!r}")
        if self.kind == "plain" and self.tag is not None:
            raise GraphError("plain edges carry no tag")
        if self.kind in ("alpha", "alpha0") and not self.tag:
            raise GraphError(f"{self.kind} label requires a nonempty tag")

    @staticmethod
    def plain() -> "EdgeLabel":
        return EdgeLabel("plain", None)

    @staticmethod
    def alpha(tag: str) -> "EdgeLabel":
        return EdgeLabel("alpha", tag)

    @staticmethod
    def alpha0(tag: str) -> "EdgeLabel":
        return EdgeLabel("alpha0", tag)


@dataclass(frozen=True)
class Node:
    """A graph node.

    ``t`` is the period index for time-varying roles. Fixed nodes are
    created by the transform stage only; the DSL never declares them.
    """

    id: str
    kind: str = "endogenous"
    role: str = "other"
    t: int | None = None
    observed: bool = True

    def __post_init__(self):
        if not self.id:
            raise GraphError("node id must be nonempty")
        if any(c in _FORBIDDEN_IN_ID for c in self.id):
            raise GraphError(f"node id {self.id!r} contains whitespace or reserved characters")
        if self.kind not in NODE_KINDS:
            raise GraphError(f"node {self.id}: unknown kind {self.kind!r}")
        if self.role not in NODE_ROLES:
            raise GraphError(f"node {self.id}: unknown role {self.role!r}")
        if self.t is not None and self.t < 0:
            raise GraphError(f"node {self.id}: period index must be nonnegative")
        if self.role == "treatment" and (self.t is None or self.t < 1):
            raise GraphError(
                f"node {self.id}: treatment nodes need a period index t >= 1 "
                "(period-0 treatment is identically zero and never drawn)"
            )


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    label: EdgeLabel = field(default_factory=EdgeLabel.plain)

    def __post_init__(self):
        if self.src == self.dst:
            raise GraphError(f"self loop on {self.src}")


class CausalGraph:
    """Immutable validated DAG with adjacency caches.

    Construction checks: unique node ids, known edge endpoints, at most one
    edge per ordered pair, no incoming edges into exogenous or fixed nodes,
    and acyclicity.
    """

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge], name: str = "g"):
        self.name = name
        node_list = sorted(nodes, key=lambda n: n.id)
        self._by_id: dict[str, Node] = {}
        for n in node_list:
            if n.id in self._by_id:
                raise GraphError(f"duplicate node {n.id!r}")
            self._by_id[n.id] = n
        self.nodes: tuple[Node, ...] = tuple(node_list)

        edge_list = sorted(edges, key=lambda e: (e.src, e.dst))
        seen: set[tuple[str, str]] = set()
        for e in edge_list:
            for endpoint in (e.src, e.dst):
                if endpoint not in self._by_id:
                    raise GraphError(f"edge {e.src} -> {e.dst}: unknown node {endpoint!r}")
            if (e.src, e.dst) in seen:
                raise GraphError(f"duplicate edge {e.src} -> {e.dst}")
            seen.add((e.src, e.dst))
            head = self._by_id[e.dst]
            if head.kind in ("exogenous", "fixed"):
                raise GraphError(f"{head.kind} node {e.dst!r} cannot have incoming edges")
        self.edges: tuple[Edge, ...] = tuple(edge_list)

        self._parents: dict[str, tuple[str, ...]] = {n.id: () for n in self.nodes}
        self._children: dict[str, tuple[str, ...]] = {n.id: () for n in self.nodes}
        par: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        chi: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        self._edge_by_pair: dict[tuple[str, str], Edge] = {}
        for e in self.edges:
            par[e.dst].append(e.src)
            chi[e.src].append(e.dst)
            self._edge_by_pair[(e.src, e.dst)] = e
        self._parents = {k: tuple(v) for k, v in par.items()}
        self._children = {k: tuple(v) for k, v in chi.items()}

        self._topo = self._toposort()

    # -- basic lookups -------------------------------------------------

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._by_id

    def __iter__(self) -> Iterator[Node]:
        return iter(self.nodes)

    def node(self, node_id: str) -> Node:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise GraphError(f"unknown node {node_id!r}") from None

    def edge(self, src: str, dst: str) -> Edge | None:
        return self._edge_by_pair.get((src, dst))

    def parents(self, node_id: str) -> tuple[str, ...]:
        self.node(node_id)
        return self._parents[node_id]

    def children(self, node_id: str) -> tuple[str, ...]:
        self.node(node_id)
        return self._children[node_id]

    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    # -- reachability ---------------------------------------------------

    def descendants(self, node_id: str) -> set[str]:
        """All nodes reachable by a directed path from ``node_id``, excluding it."""
        return self._reach(node_id, self._children)

    def ancestors(self, node_id: str) -> set[str]:
        """All nodes with a directed path into ``node_id``, excluding it."""
        return self._reach(node_id, self._parents)

    def ancestors_of_set(self, ids: Iterable[str]) -> set[str]:
        """Union of the given nodes and all their ancestors."""
        out: set[str] = set()
        stack = [self.node(i).id for i in ids]
        while stack:
            v = stack.pop()
            if v in out:
                continue
            out.add(v)
            stack.extend(self._parents[v])
        return out

    def _reach(self, node_id: str, adj: dict[str, tuple[str, ...]]) -> set[str]:
        self.node(node_id)
        out: set[str] = set()
        stack = list(adj[node_id])
        while stack:
            v = stack.pop()
            if v in out:
                continue
            out.add(v)
            stack.extend(adj[v])
        return out

    def topological_order(self) -> tuple[str, ...]:
        return self._topo

    def _toposort(self) -> tuple[str, ...]:
        indeg = {n.id: len(self._parents[n.id]) for n in self.nodes}
        queue = deque(sorted(i for i, d in indeg.items() if d == 0))
        order: list[str] = []
        while queue:
            v = queue.popleft()
            order.append(v)
            for c in sorted(self._children[v]):
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        if len(order) != len(self.nodes):
            cyclic = sorted(i for i, d in indeg.items() if d > 0)
            raise GraphError(f"cycle detected involving {', '.join(cyclic)}")
        return tuple(order)

    # -- role helpers ----------------------------------------------------

    def nodes_with_role(self, role: str) -> tuple[Node, ...]:
        return tuple(n for n in self.nodes if n.role == role)

    def treatments(self) -> tuple[Node, ...]:
        """Treatment nodes ordered by period index."""
        ts = [n for n in self.nodes if n.role == "treatment"]
        return tuple(sorted(ts, key=lambda n: (n.t, n.id)))

    def treatment_ancestors(self, node_id: str) -> set[str]:
        return {a for a in self.ancestors(node_id) if self._by_id[a].role == "treatment"}

    def node_by_role_t(self, role: str, t: int) -> Node:
        hits = [n for n in self.nodes if n.role == role and n.t == t]
        if not hits:
            raise GraphError(f"no {role} node for period {t}")
        if len(hits) > 1:
            raise GraphError(f"ambiguous {role} node for period {t}")
        return hits[0]

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        nodes = []
        for n in self.nodes:
            item = {"id": n.id, "kind": n.kind, "role": n.role, "observed": n.observed}
            if n.t is not None:
                item["t"] = n.t
            nodes.append(item)
        edges = []
        for e in self.edges:
            item: dict = {"from": e.src, "to": e.dst, "label": e.label.kind}
            if e.label.tag is not None:
                item["tag"] = e.label.tag
            edges.append(item)
        return {"name": self.name, "nodes": nodes, "edges": edges}

    @staticmethod
    def from_json(data: dict) -> "CausalGraph":
        nodes = [
            Node(
                id=n["id"],
                kind=n.get("kind", "endogenous"),
                role=n.get("role", "other"),
                t=n.get("t"),
                observed=n.get("observed", True),
            )
            for n in data.get("nodes", [])
        ]
        edges = [
            Edge(e["from"], e["to"], EdgeLabel(e.get("label", "plain"), e.get("tag")))
            for e in data.get("edges", [])
        ]
        return CausalGraph(nodes, edges, name=data.get("name", "g"))

    def with_changes(
        self,
        add_nodes: Iterable[Node] = (),
        add_edges: Iterable[Edge] = (),
        drop_nodes: Iterable[str] = (),
        drop_edges: Iterable[tuple[str, str]] = (),
        name: str | None = None,
    ) -> "CausalGraph":
        """Return a new graph with the requested additions / removals."""
        dropped_nodes = set(drop_nodes)
        dropped_edges = set(drop_edges)
        nodes = [n for n in self.nodes if n.id not in dropped_nodes]
        nodes.extend(add_nodes)
        edges = [
            e
            for e in self.edges
            if e.src not in dropped_nodes
            and e.dst not in dropped_nodes
            and (e.src, e.dst) not in dropped_edges
        ]
        edges.extend(add_edges)
        return CausalGraph(nodes, edges, name=name if name is not None else self.name)
