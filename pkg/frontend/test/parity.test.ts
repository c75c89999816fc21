/**
 * Scripted parity harness: graphs exported from the editor model are fed
 * to the engine both over HTTP (what the panels display) and through the
 * CLI; the verdicts must be identical. Also walks the template feedback
 * toggle end to end.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, readdirSync, rmSync, writeFileSync, existsSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { GraphDoc } from "../src/model.js";
import { dsepVerdictText, vasSummaryText } from "../src/verdict.js";
import type { DsepResult, VasResult } from "../src/types.js";

const FIXTURES = join(__dirname, "..", "..", "src", "dswig", "fixtures", "data");
const PORT = 18731;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let workdir: string;

async function post<T>(action: string, params: unknown): Promise<T> {
  const resp = await fetch(`${BASE}/api/${action}`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(params),
  });
  const body = (await resp.json()) as { ok: boolean; result: T; error?: { message: string } };
  if (!body.ok) throw new Error(body.error?.message ?? "request failed");
  return body.result;
}

function cli(...args: string[]): string {
  return execFileSync("python3", ["-m", "dswig.cli", ...args], { encoding: "utf-8" });
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "dswig-ui-"));
  server = spawn("python3", ["-m", "dswig.cli", "serve", "--port", String(PORT)], {
    stdio: "ignore",
  });
  for (let i = 0; i < 100; i += 1) {
    try {
      const resp = await fetch(`${BASE}/api/health`);
      if ((await resp.json()).ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error("engine did not come up");
}, 30_000);

afterAll(() => {
  server?.kill();
  rmSync(workdir, { recursive: true, force: true });
});

interface FixtureQuery {
  q: string;
  mode?: "implied" | "dsep";
  expect: boolean;
  stage?: string;
}

interface Fixture {
  name: string;
  graph: string;
  pipeline?: string;
  queries: FixtureQuery[];
}

function loadFixtures(): Fixture[] {
  return readdirSync(FIXTURES)
    .filter((name) => existsSync(join(FIXTURES, name, "expect.json")))
    .map((name) => {
      const dir = join(FIXTURES, name);
      const expectJson = JSON.parse(readFileSync(join(dir, "expect.json"), "utf-8"));
      const pipelinePath = join(dir, "pipeline.dswig");
      return {
        name,
        graph: readFileSync(join(dir, "graph.dswig"), "utf-8"),
        pipeline: existsSync(pipelinePath) ? readFileSync(pipelinePath, "utf-8") : undefined,
        queries: (expectJson.queries ?? []) as FixtureQuery[],
      };
    });
}

describe("editor/CLI parity on the fixture corpus", () => {
  it("re-imported editor exports answer every query identically", async () => {
    let checked = 0;
    for (const fixture of loadFixtures()) {
      // load into the editor model and export; final stages only (the
      // panels always query the end of the pipeline)
      const doc = GraphDoc.fromDsl(fixture.graph);
      const exported = doc.toDsl() + (fixture.pipeline ?? "");
      const file = join(workdir, `${fixture.name}.dswig`);
      writeFileSync(file, exported, "utf-8");

      for (const query of fixture.queries) {
        if (query.stage && query.stage !== "final" && query.stage !== "pruned") continue;
        const mode = query.mode ?? "implied";
        const apiResult = await post<DsepResult>("dsep", {
          graph: doc.toDsl(),
          pipeline: fixture.pipeline,
          query: query.q,
          mode,
        });
        const out = cli("check", file, "--dsep", query.q, "--mode", mode, "--format", "json");
        const cliResult = JSON.parse(out);
        expect(apiResult.separated, `${fixture.name}: ${query.q}`).toBe(cliResult.separated);
        expect(apiResult.separated, `${fixture.name}: ${query.q}`).toBe(query.expect);
        // the string the panel shows matches the CLI's human line
        const text = cli("check", file, "--dsep", query.q, "--mode", mode).trim().split("\n").pop();
        expect(dsepVerdictText(apiResult), `${fixture.name}: ${query.q}`).toBe(text);
        checked += 1;
      }
    }
    expect(checked).toBeGreaterThan(25);
  }, 120_000);
});

describe("template feedback toggle", () => {
  it("adding the treatment-to-covariate edge flips dynamic-effect feasibility", async () => {
    const restrictions = ["r-alpha", "r-y", "r-dx-t", "r-dx-t1"];
    const template = await post<{ graph: { nodes: never[]; edges: never[] } }>("template", {
      T: 3,
      restrictions,
    });
    const doc = GraphDoc.fromJson(template.graph);

    const before = await post<VasResult>("vas", {
      graph: doc.toJson(),
      g: 1,
      t: 2,
      restrictions,
    });
    expect(before.feasible).toBe(true);
    expect(before.minimal_observable).toEqual(["X0", "X1", "X2"]);
    expect(vasSummaryText(before)).toContain("minimal {X0, X1, X2}");

    doc.addEdge("D1", "X2");
    const after = await post<VasResult>("vas", {
      graph: doc.toJson(),
      g: 1,
      t: 2,
      restrictions: ["r-alpha", "r-y", "r-dx-t"],
    });
    expect(after.feasible).toBe(false);
    expect(after.minimal_potential).toEqual(["X0", "X1", "X2(0)"]);
    expect(vasSummaryText(after)).toContain("infeasible");

    // the short-term effect of the later group stays identified
    const short = await post<VasResult>("vas", {
      graph: doc.toJson(),
      g: 2,
      t: 2,
      restrictions: ["r-alpha", "r-y", "r-dx-t"],
    });
    expect(short.feasible).toBe(true);
  }, 60_000);
});
