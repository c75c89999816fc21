"""Model-class templates, minimal sufficient adjustment sets, feasibility,
and the full valid-adjustment-set family for group-time treatment effects.

The engine works on graphs over ``{U, X_0..X_{T-1}, D_1..D_{T-1},
Y_0..Y_{T-1}}`` with staggered treatment. The formula path reads the
minimal sufficient set off the all-zero SWIG (the union of the two level
nodes' covariate parents); the search path brute-forces covariate subsets
against the d-separation engine and exists as an independent cross-check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .dsep import DsepQuery, d_separated
from .errors import AdjustError
from .graph import CausalGraph, Edge, EdgeLabel, Node
from .transform import DeltaSpec, DeltaSwig, Intervention, Swig, add_difference, apply_swig

SEARCH_COVARIATE_LIMIT = 16

RESTRICTION_NAMES = {
    "r-alpha": "swas_staggered",
    "r-y": "no_outcome_dynamics",
    "r-dx-t": "no_within_period_dx",
    "r-dx-t1": "no_dx_feedback",
    "r-xy-t1": "no_xy_dynamics",
    "r-xy-t": "no_within_period_xy",
}


@dataclass(frozen=True)
class RestrictionSet:
    """Model restrictions toggling template edges.

    ``swas_staggered`` marks the shared confounder as additively separable
    in never-treated potential outcomes; ``no_outcome_dynamics`` removes
    all edges out of outcomes; the remaining four delete treatment-to-
    covariate and covariate-to-outcome edges by timing.
    """

    swas_staggered: bool = False
    no_outcome_dynamics: bool = False
    no_within_period_dx: bool = False
    no_dx_feedback: bool = False
    no_xy_dynamics: bool = False
    no_within_period_xy: bool = False

    @staticmethod
    def from_names(names) -> "RestrictionSet":
        values = {}
        for name in names:
            key = RESTRICTION_NAMES.get(name)
            if key is None:
                raise AdjustError(
                    f"unknown restriction {name!r}; valid: {', '.join(sorted(RESTRICTION_NAMES))}"
                )
            values[key] = True
        return RestrictionSet(**values)

    def baseline(self) -> bool:
        return self.swas_staggered and self.no_outcome_dynamics


@dataclass(frozen=True)
class TemplateSpec:
    T: int
    restrictions: RestrictionSet = field(default_factory=RestrictionSet)

    def __post_init__(self):
        if self.T < 2:
            raise AdjustError("templates need at least two periods")


@dataclass(frozen=True)
class Target:
    """An ATT(g, t) query with its control group."""

    g: int
    t: int
    control: str = "nt"          # "nt" or "nyt"
    nyt_s: int | None = None

    def __post_init__(self):
        if self.g < 1:
            raise AdjustError("first-treatment period g must be >= 1")
        if self.t < 0:
            raise AdjustError("outcome period t must be >= 0")
        if self.control not in ("nt", "nyt"):
            raise AdjustError(f"unknown control group {self.control!r}")
        if self.control == "nyt":
            if self.nyt_s is None:
                raise AdjustError("not-yet-treated control needs a cutoff period s")
            if self.nyt_s < max(self.g - 1, self.t):
                raise AdjustError(
                    f"not-yet-treated cutoff s={self.nyt_s} must satisfy s >= max(g-1, t) = {max(self.g - 1, self.t)}"
                )
        elif self.nyt_s is not None:
            raise AdjustError("cutoff s only applies to the not-yet-treated control")

    def validate_periods(self, T: int):
        if self.g > T - 1:
            raise AdjustError(f"g={self.g} outside 1..{T - 1}")
        if self.t > T - 1:
            raise AdjustError(f"t={self.t} outside 0..{T - 1}")
        if self.control == "nyt" and self.nyt_s > T - 1:
            raise AdjustError(f"s={self.nyt_s} outside 0..{T - 1}")


@dataclass(frozen=True)
class AdjustmentResult:
    target: Target
    minimal_potential: tuple[str, ...]
    minimal_observable: tuple[str, ...]
    feasible: bool
    vas_family: dict
    method: str

    def to_json(self) -> dict:
        out = {
            "g": self.target.g,
            "t": self.target.t,
            "control": self.target.control,
            "minimal_potential": list(self.minimal_potential),
            "minimal_observable": list(self.minimal_observable),
            "feasible": self.feasible,
            "vas_family": self.vas_family,
            "method": self.method,
        }
        if self.target.control == "nyt":
            out["s"] = self.target.nyt_s
        return out


def build_template(spec: TemplateSpec) -> CausalGraph:
    """Maximal graph of the model class under the given restrictions.

    Within a period the causal order is X_t, then D_t, then Y_t. Restriction
    flags only delete edges from that maximal order. The confounder's edges
    into outcomes carry the shared separability tag when ``swas_staggered``;
    the label is conditional (all-zero world) whenever the outcome has a
    treatment ancestor, unconditional otherwise.
    """
    T = spec.T
    r = spec.restrictions
    nodes = [Node("U", kind="exogenous", role="confounder", observed=False)]
    nodes += [Node(f"X{t}", role="covariate", t=t) for t in range(T)]
    nodes += [Node(f"D{t}", role="treatment", t=t) for t in range(1, T)]
    nodes += [Node(f"Y{t}", role="outcome", t=t) for t in range(T)]

    edges: list[Edge] = []
    for t in range(T):
        edges.append(Edge("U", f"X{t}"))
        edges.append(Edge("U", f"Y{t}"))
        if t >= 1:
            edges.append(Edge("U", f"D{t}"))
    for s in range(T - 1):
        edges.append(Edge(f"X{s}", f"X{s + 1}"))
    for s in range(T):
        for t in range(max(s + 1, 1), T):
            edges.append(Edge(f"X{s}", f"D{t}"))
        # Within a period the X -> D edge exists only when X realizes first,
        # i.e. when the within-period treatment-covariate effect is ruled out;
        # otherwise D realizes first and the pair orientation flips below.
        if r.no_within_period_dx and s >= 1:
            edges.append(Edge(f"X{s}", f"D{s}"))
    for s in range(T):
        for t in range(s, T):
            if s == t and r.no_within_period_xy:
                continue
            if s < t and r.no_xy_dynamics:
                continue
            edges.append(Edge(f"X{s}", f"Y{t}"))
    for s in range(1, T - 1):
        edges.append(Edge(f"D{s}", f"D{s + 1}"))
    for s in range(1, T):
        for t in range(s, T):
            edges.append(Edge(f"D{s}", f"Y{t}"))
        if not r.no_within_period_dx:
            edges.append(Edge(f"D{s}", f"X{s}"))
        if not r.no_dx_feedback:
            for t in range(s + 1, T):
                edges.append(Edge(f"D{s}", f"X{t}"))
    if not r.no_outcome_dynamics:
        for s in range(T):
            for t in range(s + 1, T):
                edges.append(Edge(f"Y{s}", f"Y{t}"))
                edges.append(Edge(f"Y{s}", f"D{t}"))
                edges.append(Edge(f"Y{s}", f"X{t}"))

    graph = CausalGraph(nodes, edges, name=f"template_T{T}")
    if r.swas_staggered:
        relabeled = []
        for e in graph.edges:
            if e.src == "U" and graph.node(e.dst).role == "outcome":
                kind = "alpha0" if graph.treatment_ancestors(e.dst) else "alpha"
                relabeled.append(Edge(e.src, e.dst, EdgeLabel(kind, "a")))
            else:
                relabeled.append(e)
        graph = CausalGraph(graph.nodes, relabeled, name=graph.name)
    return graph


def _validate_separability(swig: Swig):
    """The formula path needs the separability and no-dynamics structure."""
    graph = swig.graph
    tags = set()
    for e in graph.edges:
        head = graph.node(e.dst)
        tail = graph.node(e.src)
        if head.role == "outcome" and tail.kind == "exogenous" and tail.role == "confounder":
            if e.label.kind != "alpha":
                raise AdjustError(
                    "minimal sufficient set requires single world additive separability: "
                    f"edge {e.src} -> {e.dst} is not separability-labeled in the all-zero world"
                )
            tags.add(e.label.tag)
    if len(tags) > 1:
        raise AdjustError(f"confounder separability tags differ across outcomes: {sorted(tags)}")
    for node in graph.nodes:
        if node.role == "outcome" and swig.source.children(node.id):
            raise AdjustError(
                f"minimal sufficient set requires no outcome dynamics: {node.id} has descendants"
            )


def _check_all_zero(swig: Swig):
    values = swig.intervention.values
    for node in swig.source.treatments():
        if values.get(node.id) != 0:
            raise AdjustError(
                f"expected the all-zero-fix SWIG; treatment {node.id} is not fixed to 0"
            )


def minimal_sufficient_set(swig: Swig, target: Target) -> tuple[str, ...]:
    """Union of the two level nodes' SWIG parents, minus exogenous and
    fixed nodes: the minimal sufficient adjustment set for ATT(g, t).

    Requires the all-zero SWIG of a graph encoding both separability and
    the absence of outcome dynamics; errors otherwise rather than guessing.
    """
    _check_all_zero(swig)
    _validate_separability(swig)
    target.validate_periods(_graph_T(swig.source))
    members: set[str] = set()
    for period in (target.g - 1, target.t):
        level = swig.source.node_by_role_t("outcome", period)
        for p in swig.graph.parents(level.id):
            node = swig.graph.node(p)
            if node.kind in ("exogenous", "fixed"):
                continue
            members.add(p)
    return tuple(sorted(members))


def feasibility(members: tuple[str, ...], target: Target, swig: Swig) -> tuple[bool, tuple[str, ...]]:
    """Whether every potential covariate in the set is recoverable from
    observables under the estimand's conditioning.

    A potential ``X_s`` is replaceable by its observable counterpart
    exactly when every treatment ancestor of ``X_s`` is conditioned to zero,
    i.e. has period at most g-1; the rule is graph-generic and covers
    post-treatment covariates as well as staggered feedback.
    """
    infeasible = []
    for member in members:
        if not swig.is_potential(member):
            continue
        ancestors = swig.source.treatment_ancestors(member)
        if any(swig.source.node(a).t > target.g - 1 for a in ancestors):
            infeasible.append(member)
    return (not infeasible, tuple(sorted(set(members))))


def _graph_T(graph: CausalGraph) -> int:
    periods = [n.t for n in graph.nodes if n.role in ("outcome", "covariate", "treatment") and n.t is not None]
    if not periods:
        raise AdjustError("graph declares no time-indexed roles")
    return max(periods) + 1


def _potential_labels(swig: Swig, members: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(swig.short_label(m) for m in members)


def _none_result(target: Target, method: str) -> AdjustmentResult:
    return AdjustmentResult(target, (), (), False, {"kind": "none"}, method)


def _delta_for_target(swig: Swig, target: Target) -> tuple[DeltaSwig, str]:
    base = swig.source.node_by_role_t("outcome", target.g - 1).id
    top = swig.source.node_by_role_t("outcome", target.t).id
    name = f"__delta_{target.g - 1}_{target.t}"
    return add_difference(swig, DeltaSpec(name, top, base)), name


def _search_valid(
    delta: DeltaSwig,
    name: str,
    target: Target,
    z: tuple[str, ...],
    T: int,
) -> bool:
    """Brute-force estimand validity of one candidate set.

    A set is valid when it contains a feasible separating core and its
    remaining members are neutral: independent of the outcome difference
    inside the fully-untreated control world, where consistency equates
    them with their potential versions. Neutral members may be affected by
    treatment; they only ever enter the control-group regression, which is
    constant in them, so their wrong-world values never matter.
    """

    swig = delta.swig
    treatments = swig.source.treatments()
    subjects = [n.id for n in treatments if target.g <= n.t <= (target.nyt_s if target.control == "nyt" else T - 1)]
    context = [n.id for n in treatments if n.t <= target.g - 1]
    control_ctx = [
        n.id
        for n in treatments
        if n.t <= (target.nyt_s if target.control == "nyt" else T - 1)
    ]
    for k in range(len(z) + 1):
        for core in itertools.combinations(z, k):
            feasible, _ = feasibility(core, target, swig)
            if not feasible:
                continue
            core_query = DsepQuery.of([name], subjects, tuple(core) + tuple(context))
            if not d_separated(delta, core_query):
                continue
            extras = tuple(m for m in z if m not in core)
            if not extras:
                return True
            neutral_query = DsepQuery.of([name], extras, tuple(core) + tuple(control_ctx))
            if d_separated(delta, neutral_query):
                return True
    return False


def enumerate_vas(
    graph: CausalGraph,
    target: Target,
    restrictions: RestrictionSet,
    method: str = "auto",
) -> AdjustmentResult:
    """Minimal valid adjustment set, feasibility, and the full family.

    With the formula method, the family is the interval from the observable
    minimal set up to the full covariate sequence. The search method
    brute-forces all covariate subsets through the d-separation engine and
    reports the explicit family; it is capped at 16 covariates.
    """
    if method not in ("auto", "formula", "search"):
        raise AdjustError(f"unknown method {method!r}")
    T = _graph_T(graph)
    target.validate_periods(T)
    if target.t == target.g - 1:
        raise AdjustError("degenerate target: t = g-1 differences an outcome with itself")
    if not restrictions.baseline():
        return _none_result(target, method if method != "auto" else "formula")

    swig = apply_swig(graph, Intervention.all_zero(graph))
    covariates = tuple(n.id for n in sorted(graph.nodes_with_role("covariate"), key=lambda n: (n.t, n.id)))

    if method in ("auto", "formula"):
        members = minimal_sufficient_set(swig, target)
        feasible, observable = feasibility(members, target, swig)
        family: dict = (
            {"kind": "interval", "lower": sorted(observable), "upper": list(covariates)}
            if feasible
            else {"kind": "none"}
        )
        return AdjustmentResult(
            target=target,
            minimal_potential=_potential_labels(swig, members),
            minimal_observable=tuple(sorted(observable)) if feasible else (),
            feasible=feasible,
            vas_family=family,
            method="formula",
        )

    if len(covariates) > SEARCH_COVARIATE_LIMIT:
        raise AdjustError(
            f"subset search capped at {SEARCH_COVARIATE_LIMIT} covariates, graph has {len(covariates)}"
        )
    delta, name = _delta_for_target(swig, target)
    valid: list[tuple[str, ...]] = []
    for k in range(len(covariates) + 1):
        for z in itertools.combinations(covariates, k):
            if _search_valid(delta, name, target, z, T):
                valid.append(z)
    if not valid:
        return _none_result(target, "search")
    minimal = valid[0]
    return AdjustmentResult(
        target=target,
        minimal_potential=_potential_labels(swig, minimal),
        minimal_observable=minimal,
        feasible=True,
        vas_family={"kind": "list", "sets": [list(z) for z in valid]},
        method="search",
    )


# -- Table of minimal valid adjustment sets ---------------------------------

TABLE_ROWS: tuple[dict, ...] = (
    {"swas_staggered": False, "no_outcome_dynamics": False},
    {"swas_staggered": True, "no_outcome_dynamics": True},
    {"swas_staggered": True, "no_outcome_dynamics": True, "no_within_period_dx": True},
    {
        "swas_staggered": True,
        "no_outcome_dynamics": True,
        "no_within_period_dx": True,
        "no_dx_feedback": True,
    },
    {"swas_staggered": True, "no_outcome_dynamics": True, "no_xy_dynamics": True},
    {
        "swas_staggered": True,
        "no_outcome_dynamics": True,
        "no_within_period_dx": True,
        "no_xy_dynamics": True,
    },
    {
        "swas_staggered": True,
        "no_outcome_dynamics": True,
        "no_within_period_dx": True,
        "no_dx_feedback": True,
        "no_xy_dynamics": True,
    },
    {
        "swas_staggered": True,
        "no_outcome_dynamics": True,
        "no_xy_dynamics": True,
        "no_within_period_xy": True,
    },
)

# Columns and their candidate symbolic patterns. A pattern maps (g, t) to a
# concrete covariate set; the table cell is the pattern matching every
# applicable (g, t) pair.
_PATTERNS = {
    "{}": lambda g, t: set(),
    "Xbar[g-1]": lambda g, t: {f"X{s}" for s in range(g)},
    "Xbar[g]": lambda g, t: {f"X{s}" for s in range(g + 1)},
    "Xbar[t]": lambda g, t: {f"X{s}" for s in range(t + 1)},
    "{X[t],X[g-1]}": lambda g, t: {f"X{t}", f"X{g - 1}"},
    "{X[g-1],X[g]}": lambda g, t: {f"X{g - 1}", f"X{g}"},
    "{X[g-1],X[t]}": lambda g, t: {f"X{g - 1}", f"X{t}"},
}

_COLUMNS = {
    "pre_trends": ("{}", "Xbar[g-1]", "{X[t],X[g-1]}"),
    "short_term": ("{}", "Xbar[g]", "{X[g-1],X[g]}"),
    "dynamic": ("{}", "Xbar[t]", "{X[g-1],X[t]}"),
}

PATTERN_DISPLAY = {
    "{}": "∅",
    "none": "--",
    "Xbar[g-1]": "X̄_{g-1}",
    "Xbar[g]": "X̄_g",
    "Xbar[t]": "X̄_t",
    "{X[t],X[g-1]}": "X_t,X_{g-1}",
    "{X[g-1],X[g]}": "X_{g-1},X_g",
    "{X[g-1],X[t]}": "X_{g-1},X_t",
}


def _column_pairs(column: str, T: int):
    top = T - 1
    if column == "pre_trends":
        return [(g, t) for g in range(2, top + 1) for t in range(0, g - 1)]
    if column == "short_term":
        return [(g, g) for g in range(1, top + 1)]
    return [(g, t) for g in range(1, top) for t in range(g + 1, top + 1)]


def _classify_column(column: str, restrictions: RestrictionSet, T: int) -> str:
    """Symbolic minimal-VAS pattern for one table cell.

    Patterns coincide on very short panels (with T=3 the single pre-trend
    pair cannot distinguish the full prefix from a two-point set), so the
    classification runs on an internal template with at least five periods
    and is then checked against the requested T.
    """
    t_classify = max(T, 5)
    results: dict[int, dict[tuple[int, int], AdjustmentResult]] = {}
    for t_run in {t_classify, T}:
        graph = build_template(TemplateSpec(t_run, restrictions))
        results[t_run] = {
            (g, t): enumerate_vas(graph, Target(g, t), restrictions)
            for (g, t) in _column_pairs(column, t_run)
        }
    feasible_flags = {r.feasible for r in results[t_classify].values()}
    if feasible_flags == {False}:
        if any(r.feasible for r in results[T].values()):  # pragma: no cover - consistency guard
            raise AdjustError("table classification disagrees across panel lengths")
        return "none"
    if len(feasible_flags) != 1:  # pragma: no cover - no Table row behaves this way
        raise AdjustError(f"column {column}: feasibility differs across (g,t) pairs")

    for symbol in _COLUMNS[column]:
        pattern = _PATTERNS[symbol]
        if all(
            set(res.minimal_observable) == pattern(g, t)
            for t_run in (t_classify, T)
            for (g, t), res in results[t_run].items()
        ):
            return symbol
    raise AdjustError(f"column {column}: minimal sets match no known symbolic pattern")


def table1(T: int) -> dict:
    """Minimal valid adjustment sets for all eight restriction rows.

    Each row reports the symbolic pattern per question column (parallel
    pre-trends g > t, short-term g = t, dynamic g < t).
    """
    if T < 3:
        raise AdjustError("the restriction table needs at least three periods")
    rows = []
    for flags in TABLE_ROWS:
        restrictions = RestrictionSet(**flags)
        rows.append(
            {
                "restrictions": {k: getattr(restrictions, k) for k in RestrictionSet.__dataclass_fields__},
                "pre_trends": _classify_column("pre_trends", restrictions, T),
                "short_term": _classify_column("short_term", restrictions, T),
                "dynamic": _classify_column("dynamic", restrictions, T),
            }
        )
    return {"T": T, "rows": rows}
