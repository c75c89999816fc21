"""Shared action layer behind the CLI and the HTTP service.

Every action takes a JSON-compatible parameter dict and returns a
JSON-compatible result dict; the CLI and the service both dispatch here so
their outputs stay byte-identical for the same inputs.
"""

from __future__ import annotations

from .adjust import RestrictionSet, Target, TemplateSpec, build_template, enumerate_vas
from .adjust import table1 as adjust_table1
from .dsep import DsepQuery, d_separated, explain, implied_ci
from .dsl import parse_document, parse_query, serialize_graph
from .dot import to_dot
from .errors import DswigError, QueryError
from .graph import CausalGraph
from .transform import (
    DeltaSpec,
    DeltaSwig,
    GraphStage,
    Intervention,
    add_difference,
    apply_swig,
    prune,
)


def _load_graph(value) -> CausalGraph:
    if isinstance(value, str):
        return parse_document(value).graph
    if isinstance(value, dict):
        return CausalGraph.from_json(value)
    raise DswigError("graph must be DSL text or a JSON graph object")


def _build_stage(params: dict) -> GraphStage:
    """Construct the requested stage from a graph plus optional pipeline text.

    DSL graph sources may embed their own pipeline; an explicit ``pipeline``
    parameter appends after any embedded statements.
    """
    from .transform import run_pipeline

    value = params["graph"]
    pipeline_text = params.get("pipeline") or ""
    if isinstance(value, str):
        doc = parse_document(value + "\n" + pipeline_text)
    elif isinstance(value, dict):
        graph = CausalGraph.from_json(value)
        doc = parse_document(serialize_graph(graph) + "\n" + pipeline_text)
    else:
        raise DswigError("graph must be DSL text or a JSON graph object")
    if not doc.pipeline:
        return doc.graph
    return run_pipeline(doc.graph, doc.pipeline)


def act_parse(params: dict) -> dict:
    graph = _load_graph(params["graph"])
    return {"graph": graph.to_json(), "dsl": serialize_graph(graph), "dot": to_dot(graph)}


def _intervention_from(params: dict, graph: CausalGraph) -> Intervention:
    fix = params.get("fix")
    if fix is None:
        raise DswigError("missing 'fix': a {treatment: 0|1} mapping")
    if isinstance(fix, dict):
        return Intervention.fix(graph, {k: int(v) for k, v in fix.items()})
    raise DswigError("'fix' must be an object mapping treatment ids to 0 or 1")


def act_swig(params: dict) -> dict:
    graph = _load_graph(params["graph"])
    swig = apply_swig(
        graph,
        _intervention_from(params, graph),
        relabel_pretreatment=bool(params.get("relabel", True)),
        materialize=tuple(params.get("materialize", ())),
    )
    return {"swig": swig.to_json(), "dot": to_dot(swig)}


def act_delta(params: dict) -> dict:
    graph = _load_graph(params["graph"])
    swig = apply_swig(
        graph,
        _intervention_from(params, graph),
        relabel_pretreatment=bool(params.get("relabel", True)),
    )
    stage: DeltaSwig | None = None
    deltas = params.get("deltas", ())
    if not deltas:
        raise DswigError("missing 'deltas': a list of {name, minuend, subtrahend}")
    for spec in deltas:
        delta_spec = DeltaSpec(spec["name"], spec["minuend"], spec["subtrahend"])
        stage = add_difference(stage if stage is not None else swig, delta_spec)
    if params.get("prune"):
        stage = prune(stage, tuple(params["prune"]))
    return {"delta": stage.to_json(), "dot": to_dot(stage)}


def _query_from(params: dict) -> DsepQuery:
    query = params.get("query")
    if isinstance(query, str):
        x, y, z = parse_query(query)
    elif isinstance(query, dict):
        x, y, z = query.get("x", ()), query.get("y", ()), query.get("z", ())
    else:
        raise QueryError("missing 'query': a string or an {x, y, z} object")
    include_fixed = params.get("include_fixed", True)
    return DsepQuery.of(x, y, z, include_fixed=include_fixed)


def act_dsep(params: dict) -> dict:
    stage = _build_stage(params)
    query = _query_from(params)
    mode = params.get("mode", "implied")
    if mode not in ("implied", "dsep"):
        raise QueryError(f"unknown query mode {mode!r}")
    if mode == "implied":
        verdict = implied_ci(stage, query)
        result = {"separated": verdict, "implies_ci": verdict, "mode": mode}
    else:
        result = {"separated": d_separated(stage, query), "mode": mode}
    if params.get("explain"):
        result["explain"] = explain(stage, query)
    return result


def _restrictions_from(params: dict) -> RestrictionSet:
    names = params.get("restrictions", ())
    if isinstance(names, dict):
        return RestrictionSet(**names)
    return RestrictionSet.from_names(names)


def _target_from(params: dict) -> Target:
    control = params.get("control", "nt")
    return Target(
        g=int(params["g"]),
        t=int(params["t"]),
        control=control,
        nyt_s=int(params["s"]) if control == "nyt" else None,
    )


def act_vas(params: dict) -> dict:
    restrictions = _restrictions_from(params)
    if "graph" in params:
        graph = _load_graph(params["graph"])
    else:
        template = params.get("template")
        if not template:
            raise DswigError("vas needs either 'graph' or 'template': {T}")
        graph = build_template(TemplateSpec(int(template["T"]), restrictions))
    result = enumerate_vas(graph, _target_from(params), restrictions, method=params.get("method", "auto"))
    return result.to_json()


def act_table1(params: dict) -> dict:
    return adjust_table1(int(params["T"]))


def act_template(params: dict) -> dict:
    restrictions = _restrictions_from(params)
    graph = build_template(TemplateSpec(int(params["T"]), restrictions))
    return {"graph": graph.to_json(), "dsl": serialize_graph(graph), "dot": to_dot(graph)}


ACTIONS = {
    "parse": act_parse,
    "swig": act_swig,
    "delta": act_delta,
    "dsep": act_dsep,
    "vas": act_vas,
    "table1": act_table1,
    "template": act_template,
}


def run_action(name: str, params: dict) -> dict:
    handler = ACTIONS.get(name)
    if handler is None:
        raise DswigError(f"unknown action {name!r}")
    return handler(params)
