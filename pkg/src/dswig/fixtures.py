"""Conformance fixtures: transcriptions of published causal diagrams with
their expected separation verdicts and structural facts.

Each fixture directory holds ``graph.dswig`` (the diagram), an optional
``pipeline.dswig`` (fix / delta / prune statements), and ``expect.json``
listing checks with citation strings. A mismatch fails with the citation.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .adjust import Target, feasibility, minimal_sufficient_set
from .dsep import DsepQuery, d_separated, d_separated_oracle, implied_ci
from .dsl import parse_document, parse_query
from .errors import DswigError
from .graph import CausalGraph
from .transform import DeltaSwig, GraphStage, Swig, run_pipeline


@dataclass(frozen=True)
class FixtureCase:
    name: str
    graph_text: str
    pipeline_text: str | None
    expect: dict

    @staticmethod
    def load(path: Path) -> "FixtureCase":
        graph_text = (path / "graph.dswig").read_text(encoding="utf-8")
        pipeline_path = path / "pipeline.dswig"
        pipeline_text = pipeline_path.read_text(encoding="utf-8") if pipeline_path.exists() else None
        expect = json.loads((path / "expect.json").read_text(encoding="utf-8"))
        return FixtureCase(path.name, graph_text, pipeline_text, expect)


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    what: str
    cite: str
    detail: str = ""


@dataclass(frozen=True)
class FixtureReport:
    name: str
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.ok]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": [
                {"ok": c.ok, "what": c.what, "cite": c.cite, "detail": c.detail}
                for c in self.checks
            ],
        }


def fixtures_root() -> Path:
    return Path(resources.files("dswig") / "fixtures" / "data")


def list_fixtures() -> list[str]:
    return sorted(p.name for p in fixtures_root().iterdir() if (p / "expect.json").exists())


def load_fixture(name: str) -> FixtureCase:
    path = fixtures_root() / name
    if not (path / "expect.json").exists():
        raise DswigError(f"unknown fixture {name!r}")
    return FixtureCase.load(path)


def _stages(case: FixtureCase) -> dict[str, GraphStage]:
    from .dsl import DeltaStmt, FixStmt, PruneStmt

    doc = parse_document(case.graph_text, name=case.name)
    stages: dict[str, GraphStage] = {"dag": doc.graph, "final": doc.graph}
    if case.pipeline_text:
        pipeline = parse_document(case.graph_text + "\n" + case.pipeline_text, name=case.name).pipeline
        stage: GraphStage = doc.graph
        for stmt in pipeline:
            stage = run_pipeline(doc.graph, [stmt]) if isinstance(stage, CausalGraph) else _extend(stage, stmt)
            if isinstance(stmt, FixStmt):
                stages["swig"] = stage
            elif isinstance(stmt, DeltaStmt):
                stages["delta"] = stage
            elif isinstance(stmt, PruneStmt):
                stages["pruned"] = stage
        stages["final"] = stage
    return stages


def _extend(stage: GraphStage, stmt) -> GraphStage:
    from .dsl import DeltaStmt, PruneStmt
    from .transform import DeltaSpec, add_difference, prune

    if isinstance(stmt, DeltaStmt):
        return add_difference(stage, DeltaSpec(stmt.name, stmt.minuend, stmt.subtrahend))
    if isinstance(stmt, PruneStmt):
        return prune(stage, stmt.keep)
    raise DswigError("fix statements must come first in a pipeline")


def _check_query(stages: dict[str, GraphStage], spec: dict) -> CheckResult:
    x, y, z = parse_query(spec["q"])
    stage = stages[spec.get("stage", "final")]
    query = DsepQuery.of(x, y, z, include_fixed=spec.get("include_fixed", True))
    mode = spec.get("mode", "implied")
    try:
        if mode == "dsep":
            got = d_separated(stage, query)
            graph = stage if isinstance(stage, CausalGraph) else stage.graph
            if len(graph.nodes) <= 20:
                oracle = d_separated_oracle(stage, query)
                if oracle != got:
                    return CheckResult(
                        False, f"query {spec['q']}", spec.get("cite", ""),
                        f"main algorithm says {got} but oracle says {oracle}",
                    )
        elif mode == "implied":
            got = implied_ci(stage, query)
        else:
            raise DswigError(f"unknown query mode {mode!r}")
    except DswigError as exc:
        return CheckResult(False, f"query {spec['q']}", spec.get("cite", ""), f"error: {exc}")
    want = spec["expect"]
    return CheckResult(
        got == want,
        f"query {spec['q']} [{mode}]",
        spec.get("cite", ""),
        "" if got == want else f"got {got}, expected {want}",
    )


def _check_no_separating_subset(stages: dict[str, GraphStage], spec: dict) -> CheckResult:
    stage = stages[spec.get("stage", "final")]
    candidates = spec["candidates"]
    for k in range(len(candidates) + 1):
        for z in itertools.combinations(candidates, k):
            if d_separated(stage, DsepQuery.of([spec["x"]], [spec["y"]], z)):
                return CheckResult(
                    False,
                    f"no separating subset for {spec['x']} vs {spec['y']}",
                    spec.get("cite", ""),
                    f"separated by {list(z)}",
                )
    return CheckResult(True, f"no separating subset for {spec['x']} vs {spec['y']}", spec.get("cite", ""))


def _check_structure(stages: dict[str, GraphStage], expect: dict) -> list[CheckResult]:
    checks: list[CheckResult] = []
    structure = expect.get("structure", {})
    cite = expect.get("cite", "")

    def add(ok: bool, what: str, detail: str = ""):
        checks.append(CheckResult(ok, what, cite, detail))

    if "relabel" in structure:
        swig = stages["swig"]
        assert isinstance(swig, Swig)
        for node_id, label in structure["relabel"].items():
            got = swig.relabel.get(node_id)
            add(got == label, f"relabel {node_id}", f"got {got}, expected {label}" if got != label else "")
    if "redundant" in structure:
        swig = stages["swig"]
        assert isinstance(swig, Swig)
        for node_id, positions in structure["redundant"].items():
            got = list(swig.redundant.get(node_id, ()))
            add(got == positions, f"redundant suffix of {node_id}", f"got {got}, expected {positions}")
    if "resolved_alpha" in structure:
        swig = stages["swig"]
        assert isinstance(swig, Swig)
        for src, dst in structure["resolved_alpha"]:
            edge = swig.graph.edge(src, dst)
            ok = edge is not None and edge.label.kind == "alpha"
            add(ok, f"alpha resolution on {src} -> {dst}", "" if ok else f"got {edge}")
    if "delta_parents" in structure:
        delta = stages["delta"]
        assert isinstance(delta, DeltaSwig)
        by_name = {d.spec.name: d for d in delta.deltas}
        for name, parents in structure["delta_parents"].items():
            got = sorted(by_name[name].parents)
            add(got == sorted(parents), f"parents of {name}", f"got {got}, expected {sorted(parents)}")
    if "delta_cancelled" in structure:
        delta = stages["delta"]
        assert isinstance(delta, DeltaSwig)
        by_name = {d.spec.name: d for d in delta.deltas}
        for name, cancelled in structure["delta_cancelled"].items():
            got = sorted(by_name[name].cancelled)
            add(got == sorted(cancelled), f"cancelled parents of {name}", f"got {got}, expected {sorted(cancelled)}")
    if "pruned" in structure:
        pruned_stage = stages["pruned"]
        assert isinstance(pruned_stage, DeltaSwig)
        got = sorted(pruned_stage.pruned)
        add(got == sorted(structure["pruned"]), "pruned nodes", f"got {got}")
    if "suppressed" in structure:
        pruned_stage = stages["pruned"]
        assert isinstance(pruned_stage, DeltaSwig)
        got = sorted(pruned_stage.suppressed)
        add(got == sorted(structure["suppressed"]), "suppressed disturbances", f"got {got}")

    for spec in expect.get("minimal_sets", []):
        swig = stages["swig"]
        assert isinstance(swig, Swig)
        target = Target(spec["g"], spec["t"])
        try:
            members = minimal_sufficient_set(swig, target)
            labels = sorted(swig.short_label(m) for m in members)
            feasible, _ = feasibility(members, target, swig)
        except DswigError as exc:
            checks.append(CheckResult(False, f"minimal set ({spec['g']},{spec['t']})", spec.get("cite", ""), str(exc)))
            continue
        ok = labels == sorted(spec["labels"]) and feasible == spec["feasible"]
        checks.append(
            CheckResult(
                ok,
                f"minimal set ({spec['g']},{spec['t']})",
                spec.get("cite", ""),
                "" if ok else f"got {labels} feasible={feasible}, expected {sorted(spec['labels'])} feasible={spec['feasible']}",
            )
        )
    return checks


def run_fixture(case: FixtureCase) -> FixtureReport:
    """Execute a fixture's pipeline and evaluate every expectation."""
    try:
        stages = _stages(case)
    except DswigError as exc:
        return FixtureReport(
            case.name,
            (CheckResult(False, "build pipeline", case.expect.get("cite", ""), str(exc)),),
        )
    checks: list[CheckResult] = []
    for spec in case.expect.get("queries", []):
        checks.append(_check_query(stages, spec))
    for spec in case.expect.get("no_separating_subset", []):
        checks.append(_check_no_separating_subset(stages, spec))
    checks.extend(_check_structure(stages, case.expect))
    return FixtureReport(case.name, tuple(checks))


def run_all() -> list[FixtureReport]:
    return [run_fixture(load_fixture(name)) for name in list_fixtures()]
