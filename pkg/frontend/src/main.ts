/**
 * Application wiring: an editable DAG canvas on the left, live SWIG and
 * difference-graph views beside it, and query / adjustment panels that
 * re-ask the engine after every edit. The client never computes a causal
 * verdict itself.
 */

import { ApiClient, ApiRequestError, debounce, latestOnly } from "./api.js";
import { GraphDoc } from "./model.js";
import { renderGraph } from "./render.js";
import type { DeltaJson, DsepResult, SwigJson, VasResult } from "./types.js";
import { dsepVerdictText, vasSummaryText } from "./verdict.js";

type Tool = "select" | "add-node" | "add-edge";

interface DeltaSpec {
  name: string;
  minuend: string;
  subtrahend: string;
}

const api = new ApiClient("");

const state = {
  doc: new GraphDoc(),
  tool: "select" as Tool,
  selectedNode: null as string | null,
  selectedEdge: null as [string, string] | null,
  pendingEdgeSource: null as string | null,
  deltas: [] as DeltaSpec[],
  swig: null as SwigJson | null,
  delta: null as DeltaJson | null,
  witness: [] as string[],
  witnessStage: "dag" as "dag" | "swig" | "delta",
};

function $(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

const svgDag = $("canvas-dag") as unknown as SVGSVGElement;
const svgSwig = $("canvas-swig") as unknown as SVGSVGElement;
const svgDelta = $("canvas-delta") as unknown as SVGSVGElement;

// -- rendering ---------------------------------------------------------

function layoutMap(): Map<string, { x: number; y: number }> {
  return new Map(state.doc.nodes.map((n) => [n.id, { x: n.x, y: n.y }]));
}

function redrawDag(): void {
  renderGraph(svgDag, state.doc.toJson(), {
    layout: layoutMap(),
    highlightCycle: state.doc.cycleNodes(),
    highlightPath: state.witnessStage === "dag" ? state.witness : [],
    selectedNode: state.selectedNode,
    selectedEdge: state.selectedEdge,
    pendingEdgeSource: state.pendingEdgeSource,
    onNodeClick: handleNodeClick,
    onEdgeClick: handleEdgeClick,
    onCanvasClick: handleCanvasClick,
    onNodeDrag: (id, x, y) => {
      const node = state.doc.node(id);
      if (node) {
        node.x = x;
        node.y = y;
        redrawDag();
      }
    },
  });
}

function redrawStages(): void {
  if (state.swig) {
    renderGraph(svgSwig, state.swig.graph, {
      swig: state.swig,
      highlightPath: state.witnessStage === "swig" ? state.witness : [],
    });
  } else {
    svgSwig.innerHTML = "";
  }
  if (state.delta) {
    renderGraph(svgDelta, state.delta.graph, {
      swig: state.delta,
      highlightPath: state.witnessStage === "delta" ? state.witness : [],
    });
  } else {
    svgDelta.innerHTML = "";
  }
}

// -- editing -----------------------------------------------------------

function handleCanvasClick(x: number, y: number): void {
  if (state.tool === "add-node") {
    const node = state.doc.addNode({ x, y });
    state.selectedNode = node.id;
    state.selectedEdge = null;
    afterEdit();
  } else {
    state.selectedNode = null;
    state.selectedEdge = null;
    state.pendingEdgeSource = null;
    refreshInspector();
    redrawDag();
  }
}

function handleNodeClick(id: string): void {
  if (state.tool === "add-edge") {
    if (state.pendingEdgeSource === null) {
      state.pendingEdgeSource = id;
      redrawDag();
      return;
    }
    if (state.pendingEdgeSource !== id) {
      try {
        state.doc.addEdge(state.pendingEdgeSource, id);
      } catch (err) {
        setStatus(String(err));
      }
    }
    state.pendingEdgeSource = null;
    afterEdit();
    return;
  }
  state.selectedNode = id;
  state.selectedEdge = null;
  refreshInspector();
  redrawDag();
}

function handleEdgeClick(from: string, to: string): void {
  state.selectedEdge = [from, to];
  state.selectedNode = null;
  refreshInspector();
  redrawDag();
}

function deleteSelection(): void {
  if (state.selectedNode) {
    state.doc.removeNode(state.selectedNode);
    state.selectedNode = null;
  } else if (state.selectedEdge) {
    state.doc.removeEdge(...state.selectedEdge);
    state.selectedEdge = null;
  }
  afterEdit();
}

// -- inspector ----------------------------------------------------------

function refreshInspector(): void {
  const panel = $("inspector");
  panel.innerHTML = "";
  if (state.selectedNode) {
    const node = state.doc.node(state.selectedNode);
    if (!node) return;
    panel.appendChild(textField("id", node.id, (v) => state.doc.updateNode(node.id, { id: v })));
    panel.appendChild(
      selectField("kind", node.kind, ["endogenous", "exogenous"], (v) =>
        state.doc.updateNode(node.id, { kind: v as never }),
      ),
    );
    panel.appendChild(
      selectField("role", node.role, ["outcome", "covariate", "treatment", "confounder", "other"], (v) =>
        state.doc.updateNode(node.id, { role: v as never }),
      ),
    );
    panel.appendChild(
      textField("t", node.t === undefined ? "" : String(node.t), (v) =>
        state.doc.updateNode(node.id, { t: v === "" ? undefined : Number(v) }),
      ),
    );
    panel.appendChild(
      selectField("observed", String(node.observed), ["true", "false"], (v) =>
        state.doc.updateNode(node.id, { observed: v === "true" }),
      ),
    );
  } else if (state.selectedEdge) {
    const [from, to] = state.selectedEdge;
    const edge = state.doc.edges.find((e) => e.from === from && e.to === to);
    if (!edge) return;
    const title = document.createElement("div");
    title.className = "inspector-title";
    title.textContent = `${from} → ${to}`;
    panel.appendChild(title);
    panel.appendChild(
      selectField("label", edge.label, ["plain", "alpha", "alpha0"], (v) =>
        state.doc.setEdgeLabel(from, to, v as never, edge.tag ?? "a"),
      ),
    );
    panel.appendChild(textField("tag", edge.tag ?? "", (v) => state.doc.setEdgeLabel(from, to, edge.label, v)));
  } else {
    panel.textContent = "Select a node or edge to edit it.";
  }
}

function textField(label: string, value: string, commit: (v: string) => void): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = "field";
  wrap.textContent = label;
  const input = document.createElement("input");
  input.value = value;
  input.addEventListener("change", () => {
    try {
      commit(input.value);
      afterEdit();
    } catch (err) {
      setStatus(String(err));
    }
  });
  wrap.appendChild(input);
  return wrap;
}

function selectField(label: string, value: string, options: string[], commit: (v: string) => void): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = "field";
  wrap.textContent = label;
  const select = document.createElement("select");
  for (const option of options) {
    const el = document.createElement("option");
    el.value = option;
    el.textContent = option;
    if (option === value) el.selected = true;
    select.appendChild(el);
  }
  select.addEventListener("change", () => {
    try {
      commit(select.value);
      afterEdit();
    } catch (err) {
      setStatus(String(err));
    }
  });
  wrap.appendChild(select);
  return wrap;
}

// -- server round trips --------------------------------------------------

function treatments(): string[] {
  return state.doc.nodes
    .filter((n) => n.role === "treatment")
    .sort((a, b) => (a.t ?? 0) - (b.t ?? 0))
    .map((n) => n.id);
}

const refreshSwig = latestOnly(
  async () => {
    const ids = treatments();
    if (!ids.length) return { swig: null as SwigJson | null, delta: null as DeltaJson | null };
    const fix = Object.fromEntries(ids.map((id) => [id, 0]));
    const swigResult = await api.post<{ swig: SwigJson }>("swig", {
      graph: state.doc.toJson(),
      fix,
    });
    let deltaResult: DeltaJson | null = null;
    if (state.deltas.length) {
      const deltaResponse = await api.post<{ delta: DeltaJson }>("delta", {
        graph: state.doc.toJson(),
        fix,
        deltas: state.deltas,
      });
      deltaResult = deltaResponse.delta;
    }
    return { swig: swigResult.swig, delta: deltaResult };
  },
  (result) => {
    state.swig = result.swig;
    state.delta = result.delta;
    setStatus("");
    redrawStages();
  },
  (err) => {
    state.swig = null;
    state.delta = null;
    redrawStages();
    setStatus(errText(err));
  },
);

function pipelineText(): string | undefined {
  const ids = treatments();
  if (!ids.length) return undefined;
  const lines = [`fix ${ids.map((id) => `${id}=0`).join(" ")}`];
  for (const d of state.deltas) lines.push(`delta ${d.name} = ${d.minuend} - ${d.subtrahend}`);
  return lines.join("\n");
}

const runQuery = latestOnly(
  async () => {
    const query = ($("query-input") as HTMLInputElement).value.trim();
    if (!query) return null;
    const mode = ($("query-mode") as HTMLSelectElement).value;
    return api.post<DsepResult>("dsep", {
      graph: state.doc.toJson(),
      pipeline: pipelineText(),
      query,
      mode,
      explain: true,
    });
  },
  (result) => {
    const out = $("query-verdict");
    if (!result) {
      out.textContent = "";
      state.witness = [];
      redrawAll();
      return;
    }
    out.textContent = dsepVerdictText(result);
    out.className = "verdict " + (result.separated ? "good" : "bad");
    state.witness = result.explain?.witness ?? [];
    state.witnessStage = state.deltas.length ? "delta" : treatments().length ? "swig" : "dag";
    const pathsOut = $("query-paths");
    pathsOut.innerHTML = "";
    for (const path of result.explain?.paths ?? []) {
      const li = document.createElement("li");
      li.textContent =
        path.nodes.join(" — ") +
        (path.open ? "  [open]" : `  [blocked by ${path.blocked_by}: ${path.reason}]`);
      li.className = path.open ? "path-open" : "path-blocked";
      pathsOut.appendChild(li);
    }
    redrawAll();
  },
  (err) => {
    const out = $("query-verdict");
    out.textContent = errText(err);
    out.className = "verdict err";
  },
);

const runVas = latestOnly(
  async () => {
    const g = Number(($("vas-g") as HTMLInputElement).value);
    const t = Number(($("vas-t") as HTMLInputElement).value);
    if (!Number.isFinite(g) || !Number.isFinite(t)) return null;
    const control = ($("vas-control") as HTMLSelectElement).value;
    const params: Record<string, unknown> = {
      graph: state.doc.toJson(),
      g,
      t,
      control,
      restrictions: activeRestrictions(),
    };
    if (control === "nyt") params.s = Number(($("vas-s") as HTMLInputElement).value);
    return api.post<VasResult>("vas", params);
  },
  (result) => {
    const out = $("vas-verdict");
    if (!result) {
      out.textContent = "";
      return;
    }
    out.textContent = vasSummaryText(result);
    out.className = "verdict " + (result.feasible ? "good" : "bad");
  },
  (err) => {
    const out = $("vas-verdict");
    out.textContent = errText(err);
    out.className = "verdict err";
  },
);

function activeRestrictions(): string[] {
  return [...document.querySelectorAll<HTMLInputElement>("#vas-flags input:checked")].map(
    (el) => el.value,
  );
}

// -- pipeline controls ----------------------------------------------------

function refreshDeltaList(): void {
  const list = $("delta-list");
  list.innerHTML = "";
  for (const d of state.deltas) {
    const li = document.createElement("li");
    li.textContent = `${d.name} = ${d.minuend} − ${d.subtrahend} `;
    const remove = document.createElement("button");
    remove.textContent = "×";
    remove.addEventListener("click", () => {
      state.deltas = state.deltas.filter((x) => x !== d);
      afterEdit();
    });
    li.appendChild(remove);
    list.appendChild(li);
  }
  const minuend = $("delta-minuend") as HTMLSelectElement;
  const subtrahend = $("delta-subtrahend") as HTMLSelectElement;
  for (const select of [minuend, subtrahend]) {
    const previous = select.value;
    select.innerHTML = "";
    for (const node of state.doc.nodes.filter((n) => n.kind === "endogenous")) {
      const option = document.createElement("option");
      option.value = node.id;
      option.textContent = node.id;
      select.appendChild(option);
    }
    if ([...select.options].some((o) => o.value === previous)) select.value = previous;
  }
}

// -- glue -------------------------------------------------------------------

const refreshAnalyses = debounce(() => {
  refreshSwig();
  runQuery();
  runVas();
}, 150);

function afterEdit(): void {
  refreshInspector();
  refreshDeltaList();
  redrawDag();
  refreshAnalyses();
}

function redrawAll(): void {
  redrawDag();
  redrawStages();
}

function setStatus(text: string): void {
  $("status").textContent = text;
}

function errText(err: unknown): string {
  if (err instanceof ApiRequestError) return `${err.detail.code}: ${err.detail.message}`;
  return String(err);
}

function download(filename: string, text: string): void {
  const a = document.createElement("a");
  a.href = URL.createObjectURL(new Blob([text], { type: "text/plain" }));
  a.download = filename;
  a.click();
  URL.revokeObjectURL(a.href);
}

async function loadTemplate(): Promise<void> {
  const T = Number(($("template-T") as HTMLInputElement).value);
  try {
    const result = await api.post<{ graph: { nodes: never[]; edges: never[]; name?: string } }>(
      "template",
      { T, restrictions: activeRestrictions() },
    );
    state.doc = GraphDoc.fromJson(result.graph);
    state.deltas = [];
    state.selectedNode = null;
    state.selectedEdge = null;
    afterEdit();
  } catch (err) {
    setStatus(errText(err));
  }
}

function bindToolbar(): void {
  for (const tool of ["select", "add-node", "add-edge"] as Tool[]) {
    $(`tool-${tool}`).addEventListener("click", () => {
      state.tool = tool;
      state.pendingEdgeSource = null;
      for (const other of ["select", "add-node", "add-edge"]) {
        $(`tool-${other}`).classList.toggle("active", other === tool);
      }
    });
  }
  $("tool-delete").addEventListener("click", deleteSelection);
  $("tool-undo").addEventListener("click", () => {
    if (state.doc.undo()) afterEdit();
  });
  $("tool-redo").addEventListener("click", () => {
    if (state.doc.redo()) afterEdit();
  });
  $("tool-export-dsl").addEventListener("click", () => download(`${state.doc.name}.dswig`, exportDsl()));
  $("tool-export-dot").addEventListener("click", async () => {
    try {
      const result = await api.post<{ dot: string }>("parse", { graph: state.doc.toJson() });
      download(`${state.doc.name}.dot`, result.dot);
    } catch (err) {
      setStatus(errText(err));
    }
  });
  $("tool-import").addEventListener("click", () => {
    const text = prompt("Paste graph source (.dswig)");
    if (!text) return;
    try {
      state.doc = GraphDoc.fromDsl(text);
      state.deltas = [];
      afterEdit();
    } catch (err) {
      setStatus(errText(err));
    }
  });
  $("delta-add").addEventListener("click", () => {
    const name = ($("delta-name") as HTMLInputElement).value.trim() || `d${state.deltas.length + 1}`;
    const minuend = ($("delta-minuend") as HTMLSelectElement).value;
    const subtrahend = ($("delta-subtrahend") as HTMLSelectElement).value;
    if (!minuend || !subtrahend || minuend === subtrahend) {
      setStatus("pick two distinct levels for the difference node");
      return;
    }
    state.deltas.push({ name, minuend, subtrahend });
    afterEdit();
  });
  $("query-run").addEventListener("click", () => runQuery());
  ($("query-input") as HTMLInputElement).addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") runQuery();
  });
  $("vas-run").addEventListener("click", () => runVas());
  $("template-load").addEventListener("click", loadTemplate);
  for (const input of document.querySelectorAll<HTMLInputElement>("#vas-flags input")) {
    input.addEventListener("change", () => runVas());
  }
  ($("vas-control") as HTMLSelectElement).addEventListener("change", () => runVas());
  window.addEventListener("keydown", (ev) => {
    if (ev.key === "Delete" || ev.key === "Backspace") {
      const target = ev.target as HTMLElement;
      if (target.tagName !== "INPUT" && target.tagName !== "SELECT") deleteSelection();
    }
    if ((ev.ctrlKey || ev.metaKey) && ev.key === "z") {
      if (state.doc.undo()) afterEdit();
    }
  });
}

/** Export the document plus the current pipeline so the engine's CLI
 * reproduces exactly what the panels show. */
function exportDsl(): string {
  const pipeline = pipelineText();
  return state.doc.toDsl() + (pipeline ? pipeline + "\n" : "");
}

async function boot(): Promise<void> {
  bindToolbar();
  if (!(await api.health())) {
    setStatus("engine unreachable; start it with: dswig serve --static frontend/dist");
  }
  await loadDefaultDocument();
}

async function loadDefaultDocument(): Promise<void> {
  try {
    const result = await api.post<{ graph: { nodes: never[]; edges: never[] } }>("template", {
      T: 3,
      restrictions: ["r-alpha", "r-y", "r-dx-t", "r-dx-t1"],
    });
    state.doc = GraphDoc.fromJson(result.graph);
  } catch {
    state.doc = new GraphDoc();
  }
  afterEdit();
}

boot();
