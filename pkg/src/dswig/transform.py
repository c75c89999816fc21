"""Intervention transforms: SWIG node splitting and relabeling, difference
nodes with separability cancellation, and descendant-free pruning.

All operations are pure: each returns a new value and never mutates its
inputs, so transformed graphs can be shared across threads freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import TransformError
from .graph import CausalGraph, Edge, EdgeLabel, Node

# Forms a name can take when resolving against a transformed graph.
FORM_CANONICAL = "canonical"  # the pre-relabel id, i.e. the observable name
FORM_POTENTIAL = "potential"  # the relabeled potential-variable name
FORM_FIXED = "fixed"          # a fixed split-node id


@dataclass(frozen=True)
class Intervention:
    """Treatments pinned to fixed values, ordered by period index."""

    assignments: tuple[tuple[str, int], ...]

    @staticmethod
    def fix(graph: CausalGraph, values: dict[str, int]) -> "Intervention":
        items = []
        for tid, value in values.items():
            if tid not in graph:
                raise TransformError(f"unknown treatment node {tid!r}")
            node = graph.node(tid)
            if node.role != "treatment":
                raise TransformError(f"cannot fix non-treatment node {tid!r}")
            if value not in (0, 1):
                raise TransformError(f"treatment {tid} can only be fixed to 0 or 1")
            items.append((node.t, tid, value))
        items.sort()
        return Intervention(tuple((tid, value) for _, tid, value in items))

    @staticmethod
    def all_zero(graph: CausalGraph) -> "Intervention":
        return Intervention.fix(graph, {n.id: 0 for n in graph.treatments()})

    @property
    def treatment_ids(self) -> tuple[str, ...]:
        return tuple(tid for tid, _ in self.assignments)

    @property
    def values(self) -> dict[str, int]:
        return dict(self.assignments)

    def is_all_zero(self) -> bool:
        return all(v == 0 for _, v in self.assignments)


def fixed_node_id(tid: str, value: int) -> str:
    return f"{tid}={value}"


@dataclass(frozen=True)
class DeltaSpec:
    """A difference node ``name := minuend - subtrahend``.

    Only plain (non-difference) random nodes may serve as levels; the
    combinator is fixed to subtraction.
    """

    name: str
    minuend: str
    subtrahend: str
    combinator: str = "difference"

    def __post_init__(self):
        if self.minuend == self.subtrahend:
            raise TransformError("difference node needs two distinct levels")
        if self.combinator != "difference":
            raise TransformError("only the difference combinator is supported")


@dataclass(frozen=True)
class DeltaInfo:
    spec: DeltaSpec
    parents: tuple[str, ...]
    cancelled: tuple[str, ...]


@dataclass(frozen=True)
class Swig:
    """A single world intervention graph.

    ``graph`` holds the transformed DAG including fixed split-parts;
    node ids stay the pre-relabel ones, with potential-variable labels kept
    in ``relabel`` and gray (redundant) suffix positions in ``redundant``.
    """

    graph: CausalGraph
    source: CausalGraph
    intervention: Intervention
    split: dict[str, str]                      # treatment id -> fixed part id
    relabel: dict[str, str]                    # node id -> potential label
    redundant: dict[str, tuple[int, ...]]      # node id -> gray suffix positions
    suffix: dict[str, tuple[int, ...]]         # node id -> suffix values
    materialized: frozenset[str] = frozenset()

    # -- naming ---------------------------------------------------------

    def fixed_ids(self) -> frozenset[str]:
        return frozenset(self.split.values())

    def is_potential(self, node_id: str) -> bool:
        """True when the node is a genuine potential variable (a descendant
        of some fixed treatment), as opposed to a Remark-style relabel of an
        unaffected node."""
        positions = self.suffix.get(node_id)
        if positions is None:
            return False
        red = set(self.redundant.get(node_id, ()))
        return any(k not in red for k in range(len(positions)))

    def display_label(self, node_id: str) -> str:
        return self.relabel.get(node_id, node_id)

    def short_label(self, node_id: str) -> str:
        """Compact display form: drop trailing redundant suffix positions,
        falling back to the bare id when the whole suffix is redundant."""
        if node_id not in self.suffix:
            return node_id
        if not self.is_potential(node_id):
            return node_id
        trimmed = self._trimmed_label(node_id)
        return trimmed if trimmed is not None else self.relabel[node_id]

    def alias_map(self) -> dict[str, tuple[str, str]]:
        """Every addressable name -> (node id, form). Canonical ids win on collisions."""
        table: dict[str, tuple[str, str]] = {}
        for node in self.graph.nodes:
            form = FORM_FIXED if node.kind == "fixed" else FORM_CANONICAL
            table[node.id] = (node.id, form)
        for node_id, label in sorted(self.relabel.items()):
            table.setdefault(label, (node_id, FORM_POTENTIAL))
            trimmed = self._trimmed_label(node_id)
            if trimmed is not None:
                table.setdefault(trimmed, (node_id, FORM_POTENTIAL))
        return table

    def _trimmed_label(self, node_id: str) -> str | None:
        """Label with trailing redundant suffix positions dropped, e.g.
        ``Y1(0,0)`` with gray second slot -> ``Y1(0)``."""
        values = self.suffix.get(node_id)
        if values is None:
            return None
        red = set(self.redundant.get(node_id, ()))
        end = len(values)
        while end > 0 and (end - 1) in red:
            end -= 1
        if end == len(values):
            return None
        if end == 0:
            return None  # fully redundant: the canonical id itself is the alias
        return f"{node_id}({','.join(str(v) for v in values[:end])})"

    def resolve(self, name: str) -> tuple[str, str]:
        table = self.alias_map()
        if name not in table:
            raise TransformError(f"unknown node or alias {name!r}")
        return table[name]

    # -- disturbance bookkeeping -----------------------------------------

    def disturbance_of(self, node_id: str, delta_ids: frozenset[str] = frozenset()) -> str | None:
        """An exogenous parent whose only children are ``node_id`` and
        difference nodes, if one exists."""
        for p in sorted(self.graph.parents(node_id)):
            if self.graph.node(p).kind != "exogenous":
                continue
            children = set(self.graph.children(p))
            if node_id in children and children <= {node_id} | set(delta_ids):
                return p
        return None

    def materialize_disturbances(self, node_ids, delta_ids: frozenset[str] = frozenset()) -> "Swig":
        """Ensure the listed nodes have explicit exogenous disturbances,
        creating ``U_<node>`` nodes where missing."""
        graph = self.graph
        created: set[str] = set(self.materialized)
        for node_id in node_ids:
            node = graph.node(node_id)
            if node.kind != "endogenous":
                raise TransformError(f"cannot materialize a disturbance for {node.kind} node {node_id!r}")
            probe = replace(self, graph=graph)
            if probe.disturbance_of(node_id, delta_ids) is not None:
                continue
            new_id = f"U_{node_id}"
            if new_id in graph:
                raise TransformError(
                    f"cannot auto-materialize disturbance {new_id!r}: the id is already taken"
                )
            graph = graph.with_changes(
                add_nodes=[Node(new_id, kind="exogenous", role="other", observed=False)],
                add_edges=[Edge(new_id, node_id)],
            )
            created.add(new_id)
        if graph is self.graph:
            return self
        return replace(self, graph=graph, materialized=frozenset(created))

    def to_json(self) -> dict:
        return {
            "graph": self.graph.to_json(),
            "intervention": [{"treatment": t, "value": v} for t, v in self.intervention.assignments],
            "split": dict(sorted(self.split.items())),
            "relabel": dict(sorted(self.relabel.items())),
            "redundant": {k: list(v) for k, v in sorted(self.redundant.items())},
            "materialized": sorted(self.materialized),
        }


@dataclass(frozen=True)
class DeltaSwig:
    """A SWIG augmented with sink difference nodes, optionally pruned."""

    swig: Swig
    graph: CausalGraph
    deltas: tuple[DeltaInfo, ...] = ()
    pruned: frozenset[str] = frozenset()
    suppressed: frozenset[str] = frozenset()

    def delta_ids(self) -> frozenset[str]:
        return frozenset(d.spec.name for d in self.deltas)

    def fixed_ids(self) -> frozenset[str]:
        return frozenset(f for f in self.swig.split.values() if f in self.graph)

    def is_potential(self, node_id: str) -> bool:
        if node_id in self.delta_ids():
            return True
        return self.swig.is_potential(node_id)

    def display_label(self, node_id: str) -> str:
        for d in self.deltas:
            if d.spec.name == node_id:
                return "Δ" + self.swig.display_label(d.spec.minuend)
        return self.swig.display_label(node_id)

    def alias_map(self) -> dict[str, tuple[str, str]]:
        table = {
            name: entry
            for name, entry in self.swig.alias_map().items()
            if entry[0] in self.graph
        }
        for d in self.deltas:
            table[d.spec.name] = (d.spec.name, FORM_CANONICAL)
        # Display aliases ("ΔY1(0)") are addressable when unambiguous.
        labels: dict[str, list[str]] = {}
        for d in self.deltas:
            labels.setdefault(self.display_label(d.spec.name), []).append(d.spec.name)
        for label, ids in labels.items():
            if len(ids) == 1:
                table.setdefault(label, (ids[0], FORM_POTENTIAL))
        return table

    def resolve(self, name: str) -> tuple[str, str]:
        table = self.alias_map()
        if name not in table:
            raise TransformError(f"unknown node or alias {name!r}")
        return table[name]

    def to_json(self) -> dict:
        out = self.swig.to_json()
        out["graph"] = self.graph.to_json()
        out["deltas"] = [
            {
                "name": d.spec.name,
                "minuend": d.spec.minuend,
                "subtrahend": d.spec.subtrahend,
                "parents": list(d.parents),
                "cancelled": list(d.cancelled),
            }
            for d in self.deltas
        ]
        out["pruned"] = sorted(self.pruned)
        out["suppressed"] = sorted(self.suppressed)
        return out


GraphStage = CausalGraph | Swig | DeltaSwig


def stage_graph(stage: GraphStage) -> CausalGraph:
    if isinstance(stage, CausalGraph):
        return stage
    return stage.graph


def apply_swig(
    graph: CausalGraph,
    intervention: Intervention | dict[str, int],
    relabel_pretreatment: bool = True,
    materialize: tuple[str, ...] = (),
) -> Swig:
    """Split each fixed treatment into random and fixed parts and relabel.

    The random part keeps the incoming edges, the fixed part takes over the
    outgoing ones. Descendants of fixed treatments get potential-variable
    labels; with ``relabel_pretreatment`` unaffected nodes are labeled too,
    with the whole suffix marked redundant. Conditional ``alpha0`` edge
    labels resolve to ``alpha`` on heads whose every treatment ancestor is
    fixed to zero.
    """
    if isinstance(intervention, dict):
        intervention = Intervention.fix(graph, intervention)
    else:
        Intervention.fix(graph, intervention.values)  # revalidate against this graph

    ordered = intervention.assignments
    fixed_of = {tid: fixed_node_id(tid, value) for tid, value in ordered}
    for fid in fixed_of.values():
        if fid in graph:
            raise TransformError(f"fixed node id {fid!r} collides with an existing node")

    desc = {tid: graph.descendants(tid) for tid, _ in ordered}
    period = {tid: graph.node(tid).t for tid, _ in ordered}

    nodes: list[Node] = list(graph.nodes)
    nodes.extend(
        Node(fid, kind="fixed", role="other", t=period[tid], observed=True)
        for tid, fid in fixed_of.items()
    )

    edges: list[Edge] = []
    for e in graph.edges:
        src = fixed_of.get(e.src, e.src)
        label = e.label
        if label.kind == "alpha0":
            head_anc = graph.treatment_ancestors(e.dst)
            if all(t in fixed_of and intervention.values[t] == 0 for t in head_anc):
                label = EdgeLabel.alpha(label.tag)
        edges.append(Edge(src, e.dst, label))

    relabel: dict[str, str] = {}
    redundant: dict[str, tuple[int, ...]] = {}
    suffix: dict[str, tuple[int, ...]] = {}
    for node in graph.nodes:
        if node.kind != "endogenous":
            continue
        if node.id in fixed_of:
            positions = [k for k, (tid, _) in enumerate(ordered) if period[tid] < node.t]
        else:
            positions = list(range(len(ordered)))
        if not positions:
            continue
        is_desc = [k for k in positions if node.id in desc[ordered[k][0]]]
        if not is_desc and not (relabel_pretreatment and node.role == "outcome"):
            continue
        values = tuple(ordered[k][1] for k in positions)
        relabel[node.id] = f"{node.id}({','.join(str(v) for v in values)})"
        suffix[node.id] = values
        redundant[node.id] = tuple(i for i, k in enumerate(positions) if k not in is_desc)

    swig = Swig(
        graph=CausalGraph(nodes, edges, name=f"{graph.name}({','.join(str(v) for _, v in ordered)})"),
        source=graph,
        intervention=intervention,
        split=fixed_of,
        relabel=relabel,
        redundant=redundant,
        suffix=suffix,
    )
    if materialize:
        ids = [swig.resolve(m)[0] for m in materialize]
        swig = swig.materialize_disturbances(ids)
    return swig


def _as_delta(stage: Swig | DeltaSwig) -> DeltaSwig:
    if isinstance(stage, Swig):
        return DeltaSwig(swig=stage, graph=stage.graph)
    return stage


def add_difference(stage: Swig | DeltaSwig, spec: DeltaSpec) -> DeltaSwig:
    """Append the sink node ``spec.name`` to the graph.

    The node inherits the union of its levels' incoming edges; a shared
    parent is cancelled exactly when its edges into both levels carry
    resolved ``alpha`` labels with the same tag. Missing level disturbances
    are materialized first.
    """
    d = _as_delta(stage)
    if spec.name in d.graph or any(spec.name == x.spec.name for x in d.deltas):
        raise TransformError(f"duplicate difference node {spec.name!r}")

    delta_ids = d.delta_ids()
    minuend, m_form = d.resolve(spec.minuend)
    subtrahend, s_form = d.resolve(spec.subtrahend)
    for level, form in ((minuend, m_form), (subtrahend, s_form)):
        if form == FORM_FIXED:
            raise TransformError(f"cannot difference fixed node {level!r}")
        if level in delta_ids:
            raise TransformError("difference of difference nodes is not supported")
        if d.graph.node(level).kind != "endogenous":
            raise TransformError(f"difference levels must be endogenous, got {level!r}")
    if minuend == subtrahend:
        raise TransformError("difference node needs two distinct levels")

    swig = d.swig
    if swig.graph is not d.graph:
        swig = replace(swig, graph=d.graph)
    swig = swig.materialize_disturbances([minuend, subtrahend], delta_ids)

    graph = swig.graph
    pa_m = set(graph.parents(minuend))
    pa_s = set(graph.parents(subtrahend))
    cancelled = []
    for p in sorted(pa_m & pa_s):
        em = graph.edge(p, minuend).label
        es = graph.edge(p, subtrahend).label
        if em.kind == "alpha" and es.kind == "alpha" and em.tag == es.tag:
            cancelled.append(p)
    parents = tuple(sorted((pa_m | pa_s) - set(cancelled)))

    node = Node(spec.name, kind="endogenous", role="other", observed=True)
    graph = graph.with_changes(
        add_nodes=[node],
        add_edges=[Edge(p, spec.name) for p in parents],
    )
    resolved = DeltaSpec(spec.name, minuend, subtrahend)
    return DeltaSwig(
        swig=swig,
        graph=graph,
        deltas=d.deltas + (DeltaInfo(resolved, parents, tuple(cancelled)),),
        pruned=d.pruned,
        suppressed=d.suppressed,
    )


def prune(stage: DeltaSwig, keep: tuple[str, ...]) -> DeltaSwig:
    """Iteratively drop descendant-free nodes outside ``keep`` together with
    their incoming edges, then mark single-child exogenous nodes as
    render-suppressed (they stay in the model).
    """
    d = _as_delta(stage)
    keep_ids = {d.resolve(name)[0] for name in keep}

    graph = d.graph
    removed: set[str] = set()
    while True:
        childless = [
            n.id
            for n in graph.nodes
            if n.id not in keep_ids and not graph.children(n.id)
        ]
        if not childless:
            break
        graph = graph.with_changes(drop_nodes=childless)
        removed.update(childless)

    suppressed = frozenset(
        n.id
        for n in graph.nodes
        if n.kind == "exogenous" and len(graph.children(n.id)) == 1
    )
    deltas = tuple(x for x in d.deltas if x.spec.name in graph)
    return DeltaSwig(
        swig=d.swig,
        graph=graph,
        deltas=deltas,
        pruned=d.pruned | frozenset(removed),
        suppressed=suppressed,
    )


def run_pipeline(graph: CausalGraph, pipeline, materialize: tuple[str, ...] = ()) -> GraphStage:
    """Apply parsed ``fix`` / ``delta`` / ``prune`` statements in order."""
    from .dsl import DeltaStmt, FixStmt, PruneStmt

    stage: GraphStage = graph
    for stmt in pipeline:
        if isinstance(stmt, FixStmt):
            if not isinstance(stage, CausalGraph):
                raise TransformError("fix must come before delta/prune statements")
            stage = apply_swig(
                stage,
                Intervention.fix(stage, dict(stmt.assignments)),
                relabel_pretreatment=stmt.relabel,
                materialize=materialize,
            )
        elif isinstance(stmt, DeltaStmt):
            if isinstance(stage, CausalGraph):
                raise TransformError("delta requires a fix statement first")
            stage = add_difference(stage, DeltaSpec(stmt.name, stmt.minuend, stmt.subtrahend))
        elif isinstance(stmt, PruneStmt):
            if not isinstance(stage, DeltaSwig):
                raise TransformError("prune requires at least one delta statement first")
            stage = prune(stage, stmt.keep)
        else:  # pragma: no cover - parser only emits the three statement kinds
            raise TransformError(f"unknown pipeline statement {stmt!r}")
    return stage
